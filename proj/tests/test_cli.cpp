#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qspec/cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using doctest::Approx;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qspec::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("qspec_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const auto path = scratch() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("brinck: zero potential") {
  const auto spec = write("zero.json", R"({"domain": [-5, 5]})");
  const auto r = run({"brinck", "--spec", spec});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["result"]["C"] == 2.0);
  CHECK(j["result"]["lower_bound"] == -8.0);
  CHECK(j["version"] == std::string(qspec::cli::version()));
  CHECK(j["config_digest"].get<std::string>().size() == 16);
}

TEST_CASE("brinck: alternating comb with rho = 3") {
  const auto spec = write("comb3.json", R"({"domain": [0, 30],
    "generator": {"name": "paper_comb", "params": {"rho": 3, "alpha_rule": "const"}}})");
  const auto r = run({"brinck", "--spec", spec});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["result"]["C"] == Approx(3.0));
  CHECK(j["result"]["lower_bound"] == Approx(-18.0));
}

TEST_CASE("malformed input exits 2") {
  const auto bad = write("bad.json", R"({"domain": [5, -5]})");
  CHECK(run({"brinck", "--spec", bad}).code == qspec::cli::input_error);
  const auto broken = write("broken.json", "{ not json");
  const auto r = run({"brinck", "--spec", broken});
  CHECK(r.code == qspec::cli::input_error);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"brinck", "--spec", (scratch() / "missing.json").string()}).code == 2);
  CHECK(run({"brinck"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"brinck", "--spec", bad, "--format", "xml"}).code == 2);
}

TEST_CASE("spectrum: single delta, reports on disk") {
  const auto spec = write("delta.json", R"({"domain": [-20, 20],
    "generator": {"name": "single_delta", "params": {"x0": 0, "alpha": -1}}})");
  const auto out = scratch() / "spectrum_out";
  const auto r = run({"spectrum", "--spec", spec, "--L", "10,20", "--k-max", "1", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(slurp(out / "spectrum.json"));
  CHECK(j["result"]["lower_bound_ok"] == true);
  const auto& rows = j["result"]["rows"];
  REQUIRE(rows.size() == 4);
  CHECK(rows[2]["L"] == 20.0);
  CHECK(rows[2]["k"] == 0);
  CHECK(rows[2]["lambda"].get<double>() == Approx(-0.25).epsilon(1e-6));
  const auto csv = slurp(out / "spectrum.csv");
  CHECK(csv.rfind("k,L,lambda,ok\n", 0) == 0);

  CHECK(run({"spectrum", "--spec", spec, "--L", "20,10"}).code == 2);
  CHECK(run({"spectrum", "--spec", spec, "--L", "10", "--tol-lambda", "0"}).code == 2);
  CHECK(run({"spectrum", "--spec", spec, "--L", "10", "--truncation", "left"}).code == 2);
}

TEST_CASE("shoot: free half-wave") {
  const auto spec = write("free.json", R"({"domain": [0, 3.141592653589793]})");
  const auto r = run({"shoot", "--spec", spec, "--lambda", "1", "--points", "11"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["result"]["theta_end"].get<double>() == Approx(3.141592653589793).epsilon(1e-10));
  const auto csv = run({"shoot", "--spec", spec, "--lambda", "1", "--points", "11", "--format", "csv"});
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 12);
}

TEST_CASE("molchanov: profile table") {
  const auto spec = write("comb1.json", R"({"domain": [0, 40],
    "generator": {"name": "paper_comb", "params": {"rho": 1}}})");
  const auto r = run({"molchanov", "--spec", spec, "--h", "1", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("a,window_integral,right_limit,running_inf\n", 0) == 0);
}

TEST_CASE("form: hat function against an atom") {
  const auto spec = write("delta2.json", R"({"domain": [-5, 5],
    "atoms": [{"x": 0, "w": -1}]})");
  const auto u = write("hat.csv", "x,value\n-1,0\n0,1\n1,0\n");
  const auto r = run({"form", "--spec", spec, "--u", u});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["result"]["Q"].get<double>() == Approx(-1.0));
  CHECK(j["result"]["kinetic"].get<double>() == Approx(2.0));
  CHECK(j["result"]["membership"] == "converged");
  CHECK(j["result"]["form_value"].get<double>() == Approx(1.0));

  const auto garbled = write("garbled.csv", "x,value\n0,1\nnope\n");
  CHECK(run({"form", "--spec", spec, "--u", garbled}).code == 2);
  const auto outside = write("outside.csv", "-9,0\n0,1\n1,0\n");
  CHECK(run({"form", "--spec", spec, "--u", outside}).code == 2);
}

TEST_CASE("verify: exit codes follow the suite outcome") {
  const auto r = run({"verify", "--suite", "lemma3", "--seed", "42", "--cases", "300"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["result"]["suites"][0]["violations"].empty());
  // The short-interval bound fails below |I| = 1 / (2C), so this suite finds violations.
  CHECK(run({"verify", "--suite", "corollary1", "--seed", "42", "--cases", "1000"}).code ==
        qspec::cli::theorem_violation);
  CHECK(run({"verify", "--suite", "nope"}).code == 2);
}

TEST_CASE("reports are deterministic and keyed by the configuration") {
  const auto spec = write("zero2.json", R"({"domain": [-5, 5]})");
  const auto a = json::parse(run({"brinck", "--spec", spec}).out);
  const auto b = json::parse(run({"brinck", "--spec", spec}).out);
  const auto c = json::parse(run({"brinck", "--spec", spec, "--cap", "0.5"}).out);
  CHECK(a == b);
  CHECK(a["config_digest"] != c["config_digest"]);
  const auto v1 = run({"verify", "--suite", "ganelius", "--cases", "100"});
  const auto v2 = run({"verify", "--suite", "ganelius", "--cases", "100"});
  CHECK(v1.out == v2.out);
}

TEST_CASE("reproduce: both comb variants") {
  const auto out = scratch() / "repro";
  const auto r = run({"reproduce", "--out", out.string(), "--format", "md"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("| alpha_const |") != std::string::npos);
  CHECK(fs::exists(out / "reproduce.md"));
  const auto j = json::parse(slurp(out / "reproduce.json"));
  CHECK(j["result"]["variants"][0]["verdict"] == "discrete_evidence");
  CHECK(j["result"]["variants"][1]["verdict"] == "essential_evidence");

  const auto r5 = run({"reproduce", "--rho", "5"});
  REQUIRE(r5.code == 0);
  for (const auto& v : json::parse(r5.out)["result"]["variants"]) {
    CHECK(v["brinck"]["C"].get<double>() == Approx(5.0));
    CHECK(v["spectrum"]["min_eigenvalue"].get<double>() >= -50.0);
  }
}
