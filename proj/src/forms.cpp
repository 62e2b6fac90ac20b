#include "qspec/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include "qspec/criteria.hpp"
#include "qspec/error.hpp"

namespace qspec {

std::string_view to_string(Membership m) {
  switch (m) {
    case Membership::converged: return "converged";
    case Membership::diverged: return "diverged";
    case Membership::oscillating: return "oscillating";
  }
  return "?";
}

namespace {

void require_grid(std::span<const double> g, const char* name) {
  if (g.size() < 3) throw InputError(std::string(name) + " needs at least 3 values");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw InputError(std::string(name) + " must increase");
}

// [-M, N) clipped to the domain; nullopt when empty.
std::optional<Interval> partial_window(const BVPotential& p, double M, double N) {
  const double a = std::max(-M, p.lo()), b = std::min(N, p.hi());
  if (!(b > a)) return std::nullopt;
  return Interval(a, b);
}

template <class T, class Abs>
Membership classify(const std::vector<T>& table, std::size_t nM, std::size_t nN, double& spread,
                    double& tolerance, Abs abs) {
  const T last = table.back();
  spread = 0.0;
  for (std::size_t i = nM - 3; i < nM; ++i)
    for (std::size_t j = nN - 3; j < nN; ++j)
      for (std::size_t i2 = nM - 3; i2 < nM; ++i2)
        for (std::size_t j2 = nN - 3; j2 < nN; ++j2)
          spread = std::max(spread, abs(table[i * nN + j] - table[i2 * nN + j2]));
  tolerance = std::max(1e-9, 1e-7 * abs(last));
  if (spread <= tolerance) return Membership::converged;
  // Diagonal increments that keep their sign without decaying read as divergence.
  const T d1 = table[(nM - 1) * nN + nN - 1] - table[(nM - 2) * nN + nN - 2];
  const T d2 = table[(nM - 2) * nN + nN - 2] - table[(nM - 3) * nN + nN - 3];
  if constexpr (std::is_same_v<T, double>) {
    if (d1 * d2 > 0.0 && std::abs(d1) >= 0.5 * std::abs(d2)) return Membership::diverged;
  } else {
    if (std::real(d1 * std::conj(d2)) > 0.0 && abs(d1) >= 0.5 * abs(d2)) return Membership::diverged;
  }
  return Membership::oscillating;
}

}  // namespace

FormReport potential_energy(const BVPotential& p, const GridFunction& u,
                            std::span<const double> M_grid, std::span<const double> N_grid,
                            Execution ex) {
  require_grid(M_grid, "M grid");
  require_grid(N_grid, "N grid");
  FormReport r;
  r.M_grid.assign(M_grid.begin(), M_grid.end());
  r.N_grid.assign(N_grid.begin(), N_grid.end());
  r.kinetic = derivative_norm_sq(u);
  r.norm_sq = l2_norm_sq(u);
  r.h1_finite = std::isfinite(r.kinetic) && std::isfinite(r.norm_sq);
  const std::size_t nM = M_grid.size(), nN = N_grid.size();
  r.partial.assign(nM * nN, 0.0);
  const auto uc = to_complex(u);
#pragma omp parallel for schedule(static) if (ex == Execution::parallel)
  for (long i = 0; i < static_cast<long>(nM); ++i)
    for (std::size_t j = 0; j < nN; ++j)
      if (auto w = partial_window(p, M_grid[static_cast<std::size_t>(i)], N_grid[j]))
        r.partial[static_cast<std::size_t>(i) * nN + j] = stieltjes_pairing(p, uc, uc, *w).real();
  r.Q = r.partial.back();
  r.membership = classify(r.partial, nM, nN, r.spread, r.tolerance, [](double x) { return std::abs(x); });
  if (r.membership == Membership::converged && r.h1_finite) r.form_value = r.kinetic + r.Q;
  return r;
}

std::vector<double> default_M_grid(const BVPotential& p) {
  const double d = 1e-2 * (p.hi() - p.lo());
  return {-p.lo() - 2 * d, -p.lo() - d, -p.lo()};
}

std::vector<double> default_N_grid(const BVPotential& p) {
  const double d = 1e-2 * (p.hi() - p.lo());
  return {p.hi() - 2 * d, p.hi() - d, p.hi()};
}

BilinearValue form_bilinear(const BVPotential& p, const ComplexGridFunction& u,
                            const ComplexGridFunction& v, std::span<const double> M_grid,
                            std::span<const double> N_grid) {
  require_grid(M_grid, "M grid");
  require_grid(N_grid, "N grid");
  const double a = std::min(u.front(), v.front()), b = std::max(u.back(), v.back());
  const std::complex<double> kinetic = derivative_inner_product(u, v, a, b);
  const std::size_t nM = M_grid.size(), nN = N_grid.size();
  std::vector<std::complex<double>> table(nM * nN, 0.0);
  for (std::size_t i = 0; i < nM; ++i)
    for (std::size_t j = 0; j < nN; ++j)
      if (auto w = partial_window(p, M_grid[i], N_grid[j]))
        table[i * nN + j] = stieltjes_pairing(p, u, v, *w);
  double spread = 0.0, tolerance = 0.0;
  const auto m = classify(table, nM, nN, spread, tolerance,
                          [](std::complex<double> z) { return std::abs(z); });
  return {kinetic + table.back(), m == Membership::converged};
}

RayleighReport rayleigh_check(const BVPotential& p, const Interval& window, int k,
                              const SolverTolerances& tol, double step) {
  if (!(step > 0.0)) throw InputError("rayleigh_check: step must be positive");
  const double lambda = eigenvalue(p, window, k, tol);
  const double h = step / std::max(1.0, std::abs(lambda));
  const auto n = static_cast<std::size_t>(std::ceil(window.length() / h)) + 1;
  const auto xs = eigen_grid(p, window, n);
  const auto ep = eigenfunction(p, window, k, xs, tol, lambda);
  RayleighReport r;
  r.k = k;
  r.lambda = lambda;
  r.kinetic = derivative_norm_sq(ep.u);
  r.norm_sq = l2_norm_sq(ep.u);
  // u vanishes at both window ends and outside, so every partial integral
  // containing the window already equals the limit.
  r.Q = stieltjes_abs_sq(p, ep.u, window);
  r.form_value = r.kinetic + r.Q;
  r.residual = std::abs(r.form_value - lambda * r.norm_sq);
  r.n_points = xs.size();
  return r;
}

LowerBoundMargins form_lower_bound_check(const BVPotential& p, const GridFunction& u, double h) {
  if (!(h > 0.0 && h <= 1.0)) throw InputError("form_lower_bound_check: h must lie in (0, 1]");
  if (u.front() < p.lo() || u.back() > p.hi())
    throw std::out_of_range("form_lower_bound_check: u leaves the domain");
  const auto vals = u.values();
  double peak = 0.0;
  for (double x : vals) peak = std::max(peak, std::abs(x));
  if (std::abs(vals.front()) > 1e-12 * peak || std::abs(vals.back()) > 1e-12 * peak)
    throw InputError("form_lower_bound_check: u must vanish at both ends of its span");
  const double C = brinck_constant(p).C;
  const double kinetic = derivative_norm_sq(u);
  const double norm = l2_norm_sq(u);
  const double Q = stieltjes_abs_sq(p, u, Interval(u.front(), u.back()));
  const double t = kinetic + Q;
  LowerBoundMargins m;
  m.C = C;
  m.h = h;
  m.margin_s = 2 * C / h * norm + t - (1 - C * h) * kinetic;
  m.margin_q = (1 - C * h) * Q + 2 * C / h * norm + C * h * t;
  return m;
}

}  // namespace qspec
