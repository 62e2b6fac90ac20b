#pragma once

#include <span>
#include <vector>

#include "qspec/grid_function.hpp"
#include "qspec/measure.hpp"

namespace qspec {

/// Polar form of the quasi-derivative pair at x:
///   u = e^rho sin(theta),  u^[1] = u' - q u = e^rho cos(theta),
/// with q the potential's canonical primitive. theta winds without wrapping;
/// rho is kept in log form and never exponentiated internally.
struct PrueferState {
  double theta = 0.0;
  double rho = 0.0;
  double x = 0.0;
};

struct PropagationStats {
  long steps = 0;
  long rejected = 0;
};

// Re-express a state after the substitution u^[1] -> u^[1] + shift * u, keeping
// theta in the same half-turn [k pi, (k+1) pi) so the winding count survives.
PrueferState shear(PrueferState s, double shift);

/// Integrates
///   theta' = (cos theta + q sin theta)^2 + lambda sin^2 theta
///   rho'   = (1 - lambda - q^2) sin theta cos theta - q (cos^2 theta - sin^2 theta)
/// from start.x to `to` (either direction) with a Dormand-Prince 5(4) pair.
/// Steps never cross a density knot or an atom; q is the one-sided limit on
/// each piece, so (u, u^[1]) and hence (theta, rho) are continuous across atoms.
/// `tol` bounds the local error of theta and rho per step.
PrueferState propagate(const BVPotential& p, double lambda, double to, PrueferState start,
                       double tol, PropagationStats* stats = nullptr);

// States at each of `stops` (monotone in the direction of travel, first stop may
// equal start.x).
std::vector<PrueferState> propagate_through(const BVPotential& p, double lambda,
                                            PrueferState start, std::span<const double> stops,
                                            double tol, PropagationStats* stats = nullptr);

// u and u^[1] reconstructed from a state, scaled by e^{-log_ref}.
struct QuasiPair {
  double u;
  double u_quasi;
};
QuasiPair quasi_pair(const PrueferState& s, double log_ref = 0.0);

// Classical derivative u'(x+/-) = u^[1] + q(x+/-) u.
double classical_derivative(const BVPotential& p, const PrueferState& s, Side side,
                            double log_ref = 0.0);

struct SampledSolution {
  GridFunction u;
  GridFunction u_quasi;
  std::vector<PrueferState> states;
  double log_ref;  // values are e^{rho - log_ref} (sin, cos)
};

/// Solution of l_q[u] = lambda u started at xs.front() with phase theta0 and
/// sampled on xs (strictly increasing), with one global normalization.
SampledSolution solution_at(const BVPotential& p, double lambda, double theta0,
                            std::span<const double> xs, double tol);

}  // namespace qspec
