#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qspec/execution.hpp"
#include "qspec/grid_function.hpp"
#include "qspec/measure.hpp"
#include "qspec/spectral.hpp"

namespace qspec {

enum class Membership { converged, diverged, oscillating };
std::string_view to_string(Membership m);

/// Q(u) = lim_{M,N} \int_{[-M, N)} |u|^2 dq taken as a genuine double limit:
/// partial integrals are tabulated for every (M, N) pair and Q is accepted
/// once the trailing 3x3 block agrees to max(1e-9, 1e-7 |Q|).
struct FormReport {
  double kinetic;  // \int |u'|^2
  double norm_sq;  // \int |u|^2
  std::vector<double> M_grid;
  std::vector<double> N_grid;
  std::vector<double> partial;  // row-major, partial[i * N_grid.size() + j] for (M_i, N_j)
  double Q;                     // last partial
  double spread;                // max - min over the trailing block
  double tolerance;
  Membership membership;
  bool h1_finite;
  std::optional<double> form_value;  // kinetic + Q, only when converged

  double at(std::size_t i, std::size_t j) const { return partial[i * N_grid.size() + j]; }
};

FormReport potential_energy(const BVPotential& p, const GridFunction& u,
                            std::span<const double> M_grid, std::span<const double> N_grid,
                            Execution ex = Execution::parallel);

// Three-point grids reaching the domain ends, for functions whose support is
// already inside the domain.
std::vector<double> default_M_grid(const BVPotential& p);
std::vector<double> default_N_grid(const BVPotential& p);

struct BilinearValue {
  std::complex<double> value;
  bool converged;
};

/// t[u, v] = \int u' conj(v') + lim \int u conj(v) dq, linear in u and
/// conjugate-linear in v.
BilinearValue form_bilinear(const BVPotential& p, const ComplexGridFunction& u,
                            const ComplexGridFunction& v, std::span<const double> M_grid,
                            std::span<const double> N_grid);

struct RayleighReport {
  int k;
  double lambda;
  double kinetic;
  double Q;
  double norm_sq;
  double form_value;
  double residual;  // |form_value - lambda ||u||^2|
  std::size_t n_points;
};

/// Checks Q(u) = lambda ||u||^2 - ||u'||^2 on the k-th Dirichlet eigenpair of the
/// window. The sampling step scales like 1 / max(1, |lambda|) so the interpolation
/// error of the piecewise-linear eigenfunction stays below the residual contract;
/// `step` overrides the base spacing at |lambda| <= 1.
RayleighReport rayleigh_check(const BVPotential& p, const Interval& window, int k,
                              const SolverTolerances& tol, double step = 3e-4);

struct LowerBoundMargins {
  double C;
  double h;
  double margin_s;  // 2C/h ||u||^2 + t[u] - (1 - Ch) ||u'||^2
  double margin_q;  // (1 - Ch) Q(u) + 2C/h ||u||^2 + Ch t[u]
};

// u must vanish at both ends of its span (compact support in the domain);
// h in (0, 1].
LowerBoundMargins form_lower_bound_check(const BVPotential& p, const GridFunction& u, double h);

}  // namespace qspec
