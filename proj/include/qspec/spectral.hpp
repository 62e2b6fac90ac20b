#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qspec/criteria.hpp"
#include "qspec/execution.hpp"
#include "qspec/grid_function.hpp"
#include "qspec/measure.hpp"

namespace qspec {

struct SolverTolerances {
  double lambda = 1e-10;
  double ode = 1e-12;
};

/// Dirichlet problem on the closed window [a, b]: theta starts at 0 (u = 0) at
/// the left end and the eigenvalue count is read off the terminal winding.
double terminal_phase(const BVPotential& p, const Interval& window, double lambda, double tol_ode);

// Number of Dirichlet eigenvalues strictly below lambda. A terminal phase within
// rounding of a multiple of pi is treated as sitting exactly on an eigenvalue.
int count_below(const BVPotential& p, const Interval& window, double lambda, double tol_ode);

/// k-th Dirichlet eigenvalue (k = 0 is the ground state), the root of
/// theta_end(lambda) = (k + 1) pi. The bracket starts at -2C^2 - 1 with C the
/// Brinck constant of the window unless `lower` is given.
double eigenvalue(const BVPotential& p, const Interval& window, int k, const SolverTolerances& tol,
                  std::optional<double> lower = std::nullopt);

struct Eigenpair {
  int k;
  double lambda;
  GridFunction u;        // L^2-normalized, zero at both window ends
  GridFunction u_quasi;  // u' - q u on the same grid
  double match_point;
};

// Uniform points on the window plus every breakpoint inside it.
std::vector<double> eigen_grid(const BVPotential& p, const Interval& window, std::size_t n_uniform);

/// Eigenfunction sampled on xs (increasing, xs.front() == a, xs.back() == b),
/// glued from a left and a right sweep. The sweeps are matched where the sum of
/// their log-amplitudes peaks, which is where neither has picked up growth from
/// the other end.
Eigenpair eigenfunction(const BVPotential& p, const Interval& window, int k,
                        std::span<const double> xs, const SolverTolerances& tol,
                        std::optional<double> lambda = std::nullopt);

enum class Truncation { symmetric, half_line };

struct ScanConfig {
  std::vector<double> L_list;
  int k_max = 4;  // eigenvalues k = 0..k_max for every window
  double E_ref = 10.0;
  SolverTolerances tol;
  Truncation truncation = Truncation::symmetric;
  double origin = 0.0;  // centre of [-L, L], or left end of [origin, origin + L]
};

// [origin - L, origin + L] or [origin, origin + L].
Interval truncation_window(const ScanConfig& cfg, double L);

struct ScanRow {
  double L;
  int k;
  double lambda;
  bool ok;
  std::string error;
};

struct SpectrumReport {
  double C;
  double lower_bound;
  std::vector<ScanRow> rows;  // ordered by (L, k)
  std::vector<double> L_list;
  std::vector<int> counts;             // N(E_ref, L)
  std::vector<double> mean_spacing;    // (E_ref - lambda_0) / N, NaN when N = 0
  double min_eigenvalue;
  bool lower_bound_ok;
  double worst_monotonicity;  // max over k, L1 < L2 of lambda_k(L2) - lambda_k(L1)
  Evidence evidence;
  std::string note;
  std::size_t failures;
};

SpectrumReport spectrum_scan(const BVPotential& p, const ScanConfig& cfg,
                             Execution ex = Execution::parallel);

}  // namespace qspec
