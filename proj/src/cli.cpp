#include "qspec/cli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qspec/criteria.hpp"
#include "qspec/error.hpp"
#include "qspec/forms.hpp"
#include "qspec/inequality_lab.hpp"
#include "qspec/potential_spec.hpp"
#include "qspec/prufer.hpp"
#include "qspec/spectral.hpp"

namespace qspec::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view version() { return QSPEC_VERSION; }

namespace {

// What a subcommand hands back for rendering, with its exit code.
struct Outcome {
  json result;
  std::string csv;  // primary table, may be empty
  std::string md;   // narrative, may be empty
  int code = ok;
};

struct RunConfig {
  std::string command;
  std::string spec_path;
  std::vector<double> L_list;
  int k_max = 4;
  double tol_lambda = 1e-10;
  double tol_ode = 1e-12;
  double h = 1.0;
  std::uint64_t seed = 42;
  std::size_t cases = 1000;
  std::string out_dir;
  std::string format = "json";
  // Subcommand extras.
  double cap = 1.0;
  std::size_t n_starts = 2001;
  double lambda = 0.0;
  double theta0 = 0.0;
  std::size_t points = 201;
  double e_ref = 10.0;
  std::string truncation = "symmetric";
  double origin = 0.0;
  std::string u_path;
  std::string suite;
  double rho = 1.0;
  double alpha = 1.0;
  double domain_hi = 30.0;
  double molchanov_hi = 400.0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["spec"] = c.spec_path;
  j["L"] = c.L_list;
  j["k_max"] = c.k_max;
  j["tol_lambda"] = c.tol_lambda;
  j["tol_ode"] = c.tol_ode;
  j["h"] = c.h;
  j["seed"] = c.seed;
  j["cases"] = c.cases;
  if (c.command == "brinck") j["cap"] = c.cap;
  if (c.command == "molchanov") j["n_starts"] = c.n_starts;
  if (c.command == "shoot") {
    j["lambda"] = c.lambda;
    j["theta0"] = c.theta0;
    j["points"] = c.points;
  }
  if (c.command == "spectrum" || c.command == "reproduce") j["e_ref"] = c.e_ref;
  if (c.command == "spectrum") {
    j["truncation"] = c.truncation;
    j["origin"] = c.origin;
  }
  if (c.command == "form") j["u"] = c.u_path;
  if (c.command == "verify") j["suite"] = c.suite;
  if (c.command == "reproduce") {
    j["rho"] = c.rho;
    j["alpha"] = c.alpha;
    j["domain_hi"] = c.domain_hi;
    j["molchanov_hi"] = c.molchanov_hi;
  }
  return j;
}

json window_json(const Window& w) {
  return {{"a", w.a}, {"b", w.b}, {"include_a", w.include_a}, {"include_b", w.include_b}};
}

json brinck_json(const BrinckReport& r) {
  return {{"cap", r.cap},
          {"sup_neg", r.sup_neg},
          {"C", r.C},
          {"lower_bound", r.lower_bound},
          {"witness", window_json(r.witness)}};
}

void check_tolerances(const RunConfig& c) {
  if (!(c.tol_lambda > 0.0) || !(c.tol_ode > 0.0)) throw InputError("tolerances must be positive");
}

void check_L(const std::vector<double>& L) {
  if (L.empty()) throw InputError("--L needs at least one value");
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!(L[i] > 0.0)) throw InputError("--L values must be positive");
    if (i > 0 && !(L[i] > L[i - 1])) throw InputError("--L values must increase");
  }
}

struct LoadedSpec {
  BVPotential potential;
  std::string text;
};

LoadedSpec load_spec(const RunConfig& c) {
  if (c.spec_path.empty()) throw InputError("--spec is required");
  std::string text = read_file(c.spec_path);
  auto spec = parse_potential_spec(text);
  return {build_potential(spec), to_json_text(spec)};
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) {
    if (!s.empty()) s += ',';
    s += c;
  }
  return s + '\n';
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

Outcome cmd_brinck(const RunConfig& c, const BVPotential& p) {
  const auto r = brinck_constant(p, c.cap);
  Outcome o;
  o.result = brinck_json(r);
  o.result["upper"] = brinck_json(upper_brinck_constant(p, c.cap));
  o.csv = csv_line({"cap", "sup_neg", "C", "lower_bound", "witness_a", "witness_b"}) +
          csv_line({num(r.cap), num(r.sup_neg), num(r.C), num(r.lower_bound), num(r.witness.a),
                    num(r.witness.b)});
  return o;
}

Outcome cmd_molchanov(const RunConfig& c, const BVPotential& p) {
  const auto prof = molchanov_profile(p, c.h, c.n_starts);
  const auto v = classify_discreteness(prof);
  Outcome o;
  o.result = {{"h", prof.h},
              {"n_windows", prof.starts.size()},
              {"evidence", std::string(to_string(v.evidence))},
              {"inner_inf", v.inner_inf},
              {"outer_inf", v.outer_inf},
              {"spread", v.spread},
              {"note", v.note},
              {"starts", prof.starts},
              {"window_integrals", prof.window_integrals},
              {"right_limits", prof.right_limits},
              {"radii", prof.radii},
              {"running_inf", prof.running_inf}};
  // Running infimum looked up at each start's radius.
  o.csv = csv_line({"a", "window_integral", "right_limit", "running_inf"});
  for (std::size_t i = 0; i < prof.starts.size(); ++i) {
    const double r = std::abs(prof.starts[i]);
    const auto it = std::lower_bound(prof.radii.begin(), prof.radii.end(), r);
    const double inf = it == prof.radii.end() ? prof.running_inf.back()
                                              : prof.running_inf[static_cast<std::size_t>(it - prof.radii.begin())];
    o.csv += csv_line({num(prof.starts[i]), num(prof.window_integrals[i]), num(prof.right_limits[i]), num(inf)});
  }
  return o;
}

Outcome cmd_shoot(const RunConfig& c, const BVPotential& p) {
  check_tolerances(c);
  if (c.points < 2) throw InputError("--points must be at least 2");
  std::vector<double> xs(c.points);
  for (std::size_t i = 0; i < c.points; ++i)
    xs[i] = p.lo() + (p.hi() - p.lo()) * static_cast<double>(i) / static_cast<double>(c.points - 1);
  xs.back() = p.hi();
  const auto sol = solution_at(p, c.lambda, c.theta0, xs, c.tol_ode);
  Outcome o;
  o.result = {{"lambda", c.lambda},
              {"theta0", c.theta0},
              {"theta_end", sol.states.back().theta},
              {"rho_end", sol.states.back().rho},
              {"log_ref", sol.log_ref}};
  if (c.theta0 == 0.0) o.result["count_below"] = count_below(p, p.domain(), c.lambda, c.tol_ode);
  o.csv = csv_line({"x", "theta", "rho", "u", "u_quasi"});
  for (std::size_t i = 0; i < xs.size(); ++i)
    o.csv += csv_line({num(xs[i]), num(sol.states[i].theta), num(sol.states[i].rho), num(sol.u.values()[i]),
                       num(sol.u_quasi.values()[i])});
  return o;
}

ScanConfig scan_config(const RunConfig& c) {
  check_tolerances(c);
  check_L(c.L_list);
  if (c.k_max < 0) throw InputError("--k-max must be nonnegative");
  ScanConfig s;
  s.L_list = c.L_list;
  s.k_max = c.k_max;
  s.E_ref = c.e_ref;
  s.tol = {c.tol_lambda, c.tol_ode};
  s.origin = c.origin;
  if (c.truncation == "symmetric") s.truncation = Truncation::symmetric;
  else if (c.truncation == "half_line") s.truncation = Truncation::half_line;
  else throw InputError("--truncation must be symmetric or half_line");
  return s;
}

json spectrum_json(const SpectrumReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = {{"L", row.L}, {"k", row.k}, {"ok", row.ok}};
    if (row.ok) j["lambda"] = row.lambda;
    else j["error"] = row.error;
    rows.push_back(j);
  }
  return {{"C", r.C},
          {"lower_bound", r.lower_bound},
          {"min_eigenvalue", r.min_eigenvalue},
          {"lower_bound_ok", r.lower_bound_ok},
          {"L", r.L_list},
          {"counts", r.counts},
          {"mean_spacing", r.mean_spacing},
          {"worst_monotonicity", r.worst_monotonicity},
          {"evidence", std::string(to_string(r.evidence))},
          {"note", r.note},
          {"failures", r.failures},
          {"rows", rows}};
}

std::string spectrum_csv(const SpectrumReport& r) {
  std::string s = csv_line({"k", "L", "lambda", "ok"});
  for (const auto& row : r.rows)
    s += csv_line({std::to_string(row.k), num(row.L), row.ok ? num(row.lambda) : "", row.ok ? "1" : "0"});
  return s;
}

int spectrum_code(const SpectrumReport& r) {
  if (!r.lower_bound_ok) return theorem_violation;
  if (r.failures > 0) return numeric_failure;
  return ok;
}

Outcome cmd_spectrum(const RunConfig& c, const BVPotential& p) {
  const auto r = spectrum_scan(p, scan_config(c));
  return {spectrum_json(r), spectrum_csv(r), "", spectrum_code(r)};
}

GridFunction read_u_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> xs, vs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, v;
    if (!(ls >> x >> v)) {
      if (xs.empty() && lineno == 1) continue;  // header
      throw InputError(path + ":" + std::to_string(lineno) + ": expected 'x,value'");
    }
    xs.push_back(x);
    vs.push_back(v);
  }
  return GridFunction(std::move(xs), std::move(vs));
}

Outcome cmd_form(const RunConfig& c, const BVPotential& p) {
  if (c.u_path.empty()) throw InputError("form needs --u FILE (CSV of x,value)");
  const auto u = read_u_csv(c.u_path);
  if (u.front() < p.lo() || u.back() > p.hi()) throw InputError("u is sampled outside the domain");
  const auto M = default_M_grid(p), N = default_N_grid(p);
  const auto r = potential_energy(p, u, M, N);
  Outcome o;
  o.result = {{"kinetic", r.kinetic},
              {"norm_sq", r.norm_sq},
              {"Q", r.Q},
              {"spread", r.spread},
              {"tolerance", r.tolerance},
              {"membership", std::string(to_string(r.membership))},
              {"h1_finite", r.h1_finite},
              {"M_grid", r.M_grid},
              {"N_grid", r.N_grid},
              {"partial", r.partial}};
  if (r.form_value) o.result["form_value"] = *r.form_value;
  o.csv = csv_line({"M", "N", "partial"});
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < N.size(); ++j) o.csv += csv_line({num(M[i]), num(N[j]), num(r.at(i, j))});
  return o;
}

Outcome cmd_verify(const RunConfig& c) {
  std::vector<std::string> names;
  if (c.suite.empty() || c.suite == "all") {
    for (auto n : suite_names()) names.emplace_back(n);
  } else {
    names.push_back(c.suite);
  }
  Outcome o;
  o.result["suites"] = json::array();
  o.csv = csv_line({"suite", "seed", "cases", "worst_margin", "violations", "digest"});
  for (const auto& n : names) {
    const auto r = run_suite(n, c.seed, c.cases);
    json v = json::array();
    for (const auto& x : r.violations)
      v.push_back({{"case", x.case_index}, {"seed", x.case_seed}, {"inputs", hex(x.inputs_digest)}, {"margin", x.margin}});
    o.result["suites"].push_back({{"suite", r.suite},
                                  {"seed", r.seed},
                                  {"cases", r.n_cases},
                                  {"tolerance", r.tolerance},
                                  {"worst_margin", r.worst_margin},
                                  {"violations", v},
                                  {"digest", hex(r.digest)}});
    o.csv += csv_line({r.suite, std::to_string(r.seed), std::to_string(r.n_cases), num(r.worst_margin),
                       std::to_string(r.violations.size()), hex(r.digest)});
    if (!r.violations.empty()) o.code = theorem_violation;
  }
  return o;
}

// Both comb variants on x_n = sqrt(n): constant alpha and alpha / m.
Outcome cmd_reproduce(const RunConfig& c) {
  check_tolerances(c);
  if (!(c.rho >= 0.0) || !(c.alpha > 0.0)) throw InputError("--rho must be >= 0 and --alpha > 0");
  if (!(c.domain_hi > 1.0) || !(c.molchanov_hi > 1.0)) throw InputError("domain ends must exceed 1");
  RunConfig sc = c;
  sc.truncation = "half_line";
  sc.origin = 0.0;
  if (sc.L_list.empty()) sc.L_list = {c.domain_hi / 3, 2 * c.domain_hi / 3, c.domain_hi};
  const ScanConfig scan = scan_config(sc);
  if (scan.L_list.back() > c.domain_hi) throw InputError("--L exceeds the comb domain");

  Outcome o;
  std::ostringstream md;
  md << "# Alternating comb on x_n = sqrt(n)\n\n"
     << "Weights rho + alpha_m at x_{2m-1} and -rho at x_{2m}, rho = " << c.rho << ", alpha = " << c.alpha
     << ". Dirichlet truncations [0, L] for L in {";
  for (std::size_t i = 0; i < scan.L_list.size(); ++i) md << (i ? ", " : "") << scan.L_list[i];
  md << "}, E_ref = " << c.e_ref << ".\n\n";
  md << "| variant | C | -2C^2 | min eigenvalue | N(E_ref, L) | window profile | spectrum | verdict |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  o.result["variants"] = json::array();
  o.csv = csv_line({"variant", "k", "L", "lambda", "ok"});
  for (AlphaRule rule : {AlphaRule::constant, AlphaRule::inverse_n}) {
    const std::string name = rule == AlphaRule::constant ? "alpha_const" : "alpha_inv_n";
    const auto p = make_paper_comb(0.0, c.domain_hi, c.rho, rule, c.alpha);
    const auto wide = make_paper_comb(0.0, c.molchanov_hi, c.rho, rule, c.alpha);
    const auto br = brinck_constant(wide);
    const auto prof = molchanov_profile(wide, c.h, c.n_starts);
    const auto mv = classify_discreteness(prof);
    const auto sr = spectrum_scan(p, scan);
    // The window criterion decides; the spectrum sweep must not contradict it.
    Evidence verdict = Evidence::inconclusive;
    if (mv.evidence == Evidence::discrete && sr.evidence == Evidence::discrete) verdict = Evidence::discrete;
    if (mv.evidence == Evidence::essential && sr.evidence != Evidence::discrete) verdict = Evidence::essential;
    o.result["variants"].push_back({{"variant", name},
                                    {"brinck", brinck_json(br)},
                                    {"molchanov", {{"h", c.h},
                                                   {"evidence", std::string(to_string(mv.evidence))},
                                                   {"inner_inf", mv.inner_inf},
                                                   {"outer_inf", mv.outer_inf},
                                                   {"note", mv.note}}},
                                    {"spectrum", spectrum_json(sr)},
                                    {"verdict", std::string(to_string(verdict))}});
    for (const auto& row : sr.rows)
      o.csv += csv_line({name, std::to_string(row.k), num(row.L), row.ok ? num(row.lambda) : "", row.ok ? "1" : "0"});
    std::string counts;
    for (std::size_t i = 0; i < sr.counts.size(); ++i) counts += (i ? ", " : "") + std::to_string(sr.counts[i]);
    md << "| " << name << " | " << br.C << " | " << br.lower_bound << " | " << sr.min_eigenvalue << " | "
       << counts << " | " << to_string(mv.evidence) << " | " << to_string(sr.evidence) << " | "
       << to_string(verdict) << " |\n";
    o.code = std::max(o.code, spectrum_code(sr));
  }
  md << "\nThe Brinck constant stays at max(2, rho) for both variants, so both operators are bounded "
        "below by -2C^2. With constant alpha the unit-window integrals grow without bound and the "
        "eigenvalue count below E_ref settles as L grows. With alpha / m the window integrals stay "
        "bounded, which is the signature of a non-empty essential spectrum.\n\n"
     << "Verdicts are finite-truncation evidence, not proofs.\n";
  o.md = md.str();
  return o;
}

std::string render_md(const json& report) {
  std::ostringstream md;
  md << "# qspec " << report["command"].get<std::string>() << "\n\n| field | value |\n|---|---|\n";
  for (const auto& [k, v] : report["result"].items())
    if (v.is_primitive()) md << "| " << k << " | " << v.dump() << " |\n";
  return md.str();
}

std::string render_scalars_csv(const json& result) {
  std::string s = "field,value\n";
  for (const auto& [k, v] : result.items())
    if (v.is_primitive()) s += k + "," + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

int dispatch(const RunConfig& c, std::ostream& out) {
  Outcome o;
  std::string spec_text;
  if (c.command == "verify") {
    o = cmd_verify(c);
  } else if (c.command == "reproduce") {
    o = cmd_reproduce(c);
  } else {
    auto loaded = load_spec(c);
    spec_text = loaded.text;
    const BVPotential& p = loaded.potential;
    if (c.command == "brinck") o = cmd_brinck(c, p);
    else if (c.command == "molchanov") o = cmd_molchanov(c, p);
    else if (c.command == "shoot") o = cmd_shoot(c, p);
    else if (c.command == "spectrum") o = cmd_spectrum(c, p);
    else if (c.command == "form") o = cmd_form(c, p);
  }

  json report;
  report["tool"] = "qspec";
  report["version"] = version();
  report["command"] = c.command;
  const json cfg = config_json(c);
  report["config"] = cfg;
  report["config_digest"] = hex(fnv1a(cfg.dump() + spec_text));
  report["exit_code"] = o.code;
  report["result"] = o.result;

  if (!c.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw InputError("cannot create output directory '" + c.out_dir + "'");
    const fs::path dir(c.out_dir);
    write_file(dir / (c.command + ".json"), report.dump(2) + "\n");
    if (!o.csv.empty()) write_file(dir / (c.command + ".csv"), o.csv);
    if (!o.md.empty()) write_file(dir / (c.command + ".md"), o.md);
  }

  if (c.format == "json") out << report.dump(2) << "\n";
  else if (c.format == "csv") out << (o.csv.empty() ? render_scalars_csv(o.result) : o.csv);
  else out << (o.md.empty() ? render_md(report) : o.md);
  return o.code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Spectral toolkit for Schroedinger operators with measure potentials", "qspec"};
  app.set_help_flag("--help", "print help");  // -h stays free for --h
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  auto common = [&](CLI::App* s, bool spec) {
    if (spec) s->add_option("--spec", c.spec_path, "potential spec (JSON)")->required();
    s->add_option("--out", c.out_dir, "directory for report files");
    s->add_option("--format", c.format, "stdout format")
        ->check(CLI::IsMember({"json", "csv", "md"}));
    s->add_option("--tol-lambda", c.tol_lambda, "eigenvalue tolerance");
    s->add_option("--tol-ode", c.tol_ode, "ODE local error tolerance");
  };

  auto* brinck = app.add_subcommand("brinck", "Brinck constant and lower bound");
  common(brinck, true);
  brinck->add_option("--cap", c.cap, "window length cap");

  auto* molch = app.add_subcommand("molchanov", "window-integral profile");
  common(molch, true);
  molch->add_option("--h", c.h, "window length");
  molch->add_option("--n-starts", c.n_starts, "uniform window starts");

  auto* shoot = app.add_subcommand("shoot", "Pruefer propagation across the domain");
  common(shoot, true);
  shoot->add_option("--lambda", c.lambda, "spectral parameter")->required();
  shoot->add_option("--theta0", c.theta0, "initial phase");
  shoot->add_option("--points", c.points, "sample points");

  auto* spectrum = app.add_subcommand("spectrum", "Dirichlet truncation sweep");
  common(spectrum, true);
  spectrum->add_option("--L", c.L_list, "truncation lengths")->delimiter(',')->required();
  spectrum->add_option("--k-max", c.k_max, "highest eigenvalue index");
  spectrum->add_option("--e-ref", c.e_ref, "counting threshold");
  spectrum->add_option("--truncation", c.truncation, "symmetric or half_line");
  spectrum->add_option("--origin", c.origin, "window centre or left end");

  auto* form = app.add_subcommand("form", "potential energy of a sampled function");
  common(form, true);
  form->add_option("--u", c.u_path, "CSV of x,value")->required();

  auto* verify = app.add_subcommand("verify", "randomized inequality suites");
  common(verify, false);
  verify->add_option("--suite", c.suite, "suite name or 'all'");
  verify->add_option("--seed", c.seed, "base seed");
  verify->add_option("--cases", c.cases, "cases per suite");

  auto* repro = app.add_subcommand("reproduce", "alternating comb example");
  common(repro, false);
  repro->add_option("--L", c.L_list, "truncation lengths")->delimiter(',');
  repro->add_option("--k-max", c.k_max, "highest eigenvalue index");
  repro->add_option("--e-ref", c.e_ref, "counting threshold");
  repro->add_option("--h", c.h, "window length of the profile");
  repro->add_option("--rho", c.rho, "alternating weight");
  repro->add_option("--alpha", c.alpha, "odd-site excess");
  repro->add_option("--domain-hi", c.domain_hi, "right end of the spectral domain");
  repro->add_option("--molchanov-hi", c.molchanov_hi, "right end of the profile domain");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "qspec: " << e.what() << "\n";
    return input_error;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(c, out);
  } catch (const InputError& e) {
    err << "qspec: input error: " << e.what() << "\n";
    return input_error;
  } catch (const nlohmann::json::exception& e) {
    err << "qspec: input error: " << e.what() << "\n";
    return input_error;
  } catch (const std::out_of_range& e) {
    err << "qspec: input error: " << e.what() << "\n";
    return input_error;
  } catch (const NumericError& e) {
    err << "qspec: numeric failure: " << e.what() << "\n";
    return numeric_failure;
  }
}

}  // namespace qspec::cli
