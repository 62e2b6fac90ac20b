#include "qspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "qspec/error.hpp"
#include "qspec/prufer.hpp"

namespace qspec {

using std::numbers::pi;

namespace {

void require_window(const BVPotential& p, const Interval& w) {
  if (!(w.a >= p.lo() && w.b <= p.hi()))
    throw std::out_of_range("window [" + std::to_string(w.a) + ", " + std::to_string(w.b) +
                            "] leaves the potential's domain");
}

void require_tolerances(const SolverTolerances& tol) {
  if (!(tol.lambda > 0.0) || !(tol.ode > 0.0))
    throw InputError("solver tolerances must be positive");
}

// Where the left sweep (from a) and the right sweep (from b) are both large:
// the sum of their log-amplitudes peaks near the envelope maximum, and growth
// picked up past that point only flattens the sum.
double match_point(const BVPotential& p, const Interval& w, double lambda, double tol_ode) {
  const auto xs = linspace(w.a, w.b, 257);
  const auto left = propagate_through(p, lambda, PrueferState{0.0, 0.0, w.a}, xs, tol_ode);
  std::vector<double> rev(xs.rbegin(), xs.rend());
  auto right = propagate_through(p, lambda, PrueferState{0.0, 0.0, w.b}, rev, tol_ode);
  std::reverse(right.begin(), right.end());
  std::size_t m = 1;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i)
    if (left[i].rho + right[i].rho > left[m].rho + right[m].rho) m = i;
  return xs[m];
}

}  // namespace

double terminal_phase(const BVPotential& p, const Interval& window, double lambda, double tol_ode) {
  require_window(p, window);
  return propagate(p, lambda, window.b, PrueferState{0.0, 0.0, window.a}, tol_ode).theta;
}

int count_below(const BVPotential& p, const Interval& window, double lambda, double tol_ode) {
  const double t = terminal_phase(p, window, lambda, tol_ode) / pi;
  const double n = std::round(t);
  // theta_end = (k+1) pi exactly means lambda is the k-th eigenvalue, which is not below itself.
  if (std::abs(t - n) <= 16.0 * tol_ode / pi) return static_cast<int>(n) - 1;
  return static_cast<int>(std::ceil(t)) - 1;
}

double eigenvalue(const BVPotential& p, const Interval& window, int k, const SolverTolerances& tol,
                  std::optional<double> lower) {
  if (k < 0) throw InputError("eigenvalue: k must be nonnegative");
  require_tolerances(tol);
  require_window(p, window);
  const double target = (k + 1) * pi;
  auto f = [&](double lam) { return terminal_phase(p, window, lam, tol.ode) - target; };

  // Bracketing happens in the shifted variable mu = lambda + 2C^2 + 1 >= 0.
  double lo = lower ? *lower
                    : brinck_constant(restrict_to(p, window), 1.0, Execution::serial).lower_bound - 1.0;
  double flo = f(lo);
  int guard = 0;
  // The lower bound is a theorem; if the phase disagrees, keep descending so the
  // offending eigenvalue is still found and the breach shows up in the result.
  while (flo >= 0.0) {
    lo -= std::max(1.0, std::abs(lo));
    flo = f(lo);
    if (++guard > 64) throw NumericError("eigenvalue: no lower bracket for k = " + std::to_string(k));
  }
  const double len = window.length();
  double step = std::max(1.0, std::pow((k + 1) * pi / len, 2));
  double hi = lo + step;
  double fhi = f(hi);
  while (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    step *= 2.0;
    hi = lo + step;
    fhi = f(hi);
    if (++guard > 128) throw NumericError("eigenvalue: no upper bracket for k = " + std::to_string(k));
  }
  if (fhi == 0.0) return hi;

  // The terminal phase is close to a step function of lambda near a bound state, so
  // plain bisection brings the bracket down to a coarse width first.
  auto done = [&](double lo_, double hi_, double tol_) {
    return hi_ - lo_ <= tol_ ||
           hi_ - lo_ <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo_), std::abs(hi_));
  };
  const double coarse = std::max(tol.lambda, 1e-3 * std::max(1.0, std::abs(lo)));
  while (!done(lo, hi, coarse)) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  if (done(lo, hi, tol.lambda)) return 0.5 * (lo + hi);

  // Then match a left sweep (theta = 0 at a) against a right sweep (theta = (k+1) pi
  // at b) where the two log-amplitudes peak together. The mismatch is smooth and
  // increasing in lambda with its only root at lambda_k.
  const double x_m = match_point(p, window, 0.5 * (lo + hi), tol.ode);
  auto mismatch = [&](double lam) {
    const double tl = propagate(p, lam, x_m, PrueferState{0.0, 0.0, window.a}, tol.ode).theta;
    const double tr = propagate(p, lam, x_m, PrueferState{target, 0.0, window.b}, tol.ode).theta;
    return tl - tr;
  };
  double glo = mismatch(lo), ghi = mismatch(hi);
  bool smooth = glo < 0.0 && ghi >= 0.0;
  if (smooth && ghi == 0.0) return hi;
  auto g = smooth ? std::function<double(double)>(mismatch) : std::function<double(double)>(f);
  if (!smooth) {
    glo = flo;
    ghi = fhi;
  }

  // Illinois regula falsi, with a bisection whenever the bracket fails to halve.
  int kept = 0;  // -1: lo replaced last, +1: hi replaced last
  bool bisect_next = false;
  for (int iter = 0; iter < 400 && !done(lo, hi, tol.lambda); ++iter) {
    const double width = hi - lo;
    double x = bisect_next ? 0.5 * (lo + hi) : (lo * ghi - hi * glo) / (ghi - glo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx < 0.0) {
      lo = x;
      glo = gx;
      if (kept == -1) ghi *= 0.5;
      kept = -1;
    } else {
      hi = x;
      ghi = gx;
      if (kept == 1) glo *= 0.5;
      kept = 1;
    }
    bisect_next = !bisect_next && hi - lo > 0.5 * width;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> eigen_grid(const BVPotential& p, const Interval& window, std::size_t n_uniform) {
  require_window(p, window);
  auto xs = linspace(window.a, window.b, std::max<std::size_t>(n_uniform, 2));
  for (double x : p.breakpoints())
    if (x > window.a && x < window.b) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

Eigenpair eigenfunction(const BVPotential& p, const Interval& window, int k,
                        std::span<const double> xs, const SolverTolerances& tol,
                        std::optional<double> lambda) {
  require_window(p, window);
  if (xs.size() < 3) throw InputError("eigenfunction: need at least 3 sample points");
  if (xs.front() != window.a || xs.back() != window.b)
    throw InputError("eigenfunction: samples must start and end at the window ends");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw InputError("eigenfunction: sample points must increase");
  const double lam = lambda ? *lambda : eigenvalue(p, window, k, tol);

  const auto left = propagate_through(p, lam, PrueferState{0.0, 0.0, window.a}, xs, tol.ode);
  std::vector<double> rev(xs.rbegin(), xs.rend());
  auto right = propagate_through(p, lam, PrueferState{0.0, 0.0, window.b}, rev, tol.ode);
  std::reverse(right.begin(), right.end());

  const std::size_t n = xs.size();
  std::size_t m = 1;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (left[i].rho + right[i].rho > left[m].rho + right[m].rho) m = i;

  const double dtheta = left[m].theta - right[m].theta;
  const double mismatch = std::abs(std::sin(dtheta));
  if (mismatch > 1e-4)
    throw NumericError("eigenfunction: left and right sweeps disagree at the match point (|sin| = " +
                       std::to_string(mismatch) + ")");
  const double s = std::cos(dtheta) >= 0.0 ? 1.0 : -1.0;

  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& st = i <= m ? left[i] : right[i];
    const double ref = i <= m ? left[m].rho : right[m].rho;
    const double sign = i <= m ? 1.0 : s;
    const double r = sign * std::exp(st.rho - ref);
    u[i] = r * std::sin(st.theta);
    v[i] = r * std::cos(st.theta);
  }
  std::vector<double> grid(xs.begin(), xs.end());
  GridFunction uf(grid, u);
  double scale = 1.0 / std::sqrt(l2_norm_sq(uf));
  // Fix the overall sign: the largest excursion is positive.
  const auto big = std::max_element(u.begin(), u.end(),
                                    [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (*big < 0.0) scale = -scale;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] *= scale;
    v[i] *= scale;
  }
  return {k, lam, GridFunction(grid, std::move(u)), GridFunction(std::move(grid), std::move(v)),
          xs[m]};
}

Interval truncation_window(const ScanConfig& cfg, double L) {
  if (!(L > 0.0)) throw InputError("truncation length must be positive");
  if (cfg.truncation == Truncation::symmetric) return {cfg.origin - L, cfg.origin + L};
  return {cfg.origin, cfg.origin + L};
}

SpectrumReport spectrum_scan(const BVPotential& p, const ScanConfig& cfg, Execution ex) {
  if (cfg.L_list.empty()) throw InputError("spectrum_scan: empty L list");
  for (std::size_t i = 1; i < cfg.L_list.size(); ++i)
    if (!(cfg.L_list[i] > cfg.L_list[i - 1])) throw InputError("spectrum_scan: L list must increase");
  if (cfg.k_max < 0) throw InputError("spectrum_scan: k_max must be nonnegative");
  require_tolerances(cfg.tol);
  for (double L : cfg.L_list) require_window(p, truncation_window(cfg, L));

  SpectrumReport rep;
  rep.L_list = cfg.L_list;
  // Windows are nested, so the constant of the largest one covers every truncation.
  const Interval outer = truncation_window(cfg, cfg.L_list.back());
  rep.C = brinck_constant(restrict_to(p, outer), 1.0, ex).C;
  rep.lower_bound = lower_bound_estimate(rep.C);

  const std::size_t nL = cfg.L_list.size();
  const std::size_t nk = static_cast<std::size_t>(cfg.k_max) + 1;
  rep.rows.resize(nL * nk);
  rep.counts.assign(nL, 0);
  std::vector<std::string> count_errors(nL);

  const long n_tasks = static_cast<long>(nL * nk + nL);
#pragma omp parallel for schedule(dynamic, 1) if (ex == Execution::parallel)
  for (long t = 0; t < n_tasks; ++t) {
    const std::size_t idx = static_cast<std::size_t>(t);
    if (idx < nL * nk) {
      const std::size_t iL = idx / nk;
      const int k = static_cast<int>(idx % nk);
      ScanRow& row = rep.rows[idx];
      row.L = cfg.L_list[iL];
      row.k = k;
      try {
        row.lambda = eigenvalue(p, truncation_window(cfg, row.L), k, cfg.tol, rep.lower_bound - 1.0);
        row.ok = true;
      } catch (const std::exception& e) {
        row.lambda = std::numeric_limits<double>::quiet_NaN();
        row.ok = false;
        row.error = e.what();
      }
    } else {
      const std::size_t iL = idx - nL * nk;
      try {
        rep.counts[iL] =
            count_below(p, truncation_window(cfg, cfg.L_list[iL]), cfg.E_ref, cfg.tol.ode);
      } catch (const std::exception& e) {
        rep.counts[iL] = -1;
        count_errors[iL] = e.what();
      }
    }
  }

  rep.failures = 0;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.rows) {
    if (!row.ok) {
      ++rep.failures;
      continue;
    }
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, row.lambda);
  }
  for (const auto& e : count_errors)
    if (!e.empty()) ++rep.failures;
  rep.lower_bound_ok = !(rep.min_eigenvalue < rep.lower_bound - 1e-9);

  rep.mean_spacing.resize(nL);
  for (std::size_t iL = 0; iL < nL; ++iL) {
    const ScanRow& ground = rep.rows[iL * nk];
    const int N = rep.counts[iL];
    rep.mean_spacing[iL] = (N > 0 && ground.ok) ? (cfg.E_ref - ground.lambda) / N
                                                : std::numeric_limits<double>::quiet_NaN();
  }

  rep.worst_monotonicity = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t iL = 1; iL < nL; ++iL) {
      const ScanRow& a = rep.rows[(iL - 1) * nk + k];
      const ScanRow& b = rep.rows[iL * nk + k];
      if (a.ok && b.ok) rep.worst_monotonicity = std::max(rep.worst_monotonicity, b.lambda - a.lambda);
    }

  // Stabilizing counts point to discrete spectrum below E_ref; counts growing in
  // proportion to L point to spectrum that fills in as the window widens.
  const int last = rep.counts.back();
  bool proportional = nL >= 2 && last > 0;
  if (proportional) {
    double mean = 0.0;
    for (std::size_t iL = 0; iL < nL; ++iL) mean += rep.counts[iL] / cfg.L_list[iL];
    mean /= static_cast<double>(nL);
    for (std::size_t iL = 0; iL < nL; ++iL)
      if (std::abs(rep.counts[iL] / cfg.L_list[iL] - mean) > 0.1 * mean) proportional = false;
  }
  if (nL >= 2 && last > 0 && rep.counts[nL - 2] == last) {
    rep.evidence = Evidence::discrete;
    rep.note = "N(E_ref, L) is unchanged over the last two truncations (engineering criterion)";
  } else if (proportional) {
    rep.evidence = Evidence::essential;
    rep.note = "N(E_ref, L) / L stays within 10% of its mean (engineering criterion)";
  } else {
    rep.evidence = Evidence::inconclusive;
    rep.note = "N(E_ref, L) neither stabilizes nor grows in proportion to L";
  }
  return rep;
}

}  // namespace qspec
