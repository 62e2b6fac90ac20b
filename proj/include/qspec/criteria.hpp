#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qspec/execution.hpp"
#include "qspec/measure.hpp"

namespace qspec {

/// An interval with explicit endpoint closure, so windows can include or
/// exclude an atom sitting on either end.
struct Window {
  double a;
  double b;
  bool include_a = true;
  bool include_b = false;

  double length() const { return b - a; }
};

// q(b*) - q(a*) with the one-sided limits selected by the closure flags.
double measure_of(const BVPotential& p, const Window& w);

struct WindowExtremum {
  double value;
  Window witness;
};

/// sup of sign * \int_W dq over windows W inside `range` with |W| <= cap.
///
/// The range is [a, b) unless closed_right, in which case the atom at b may
/// be included too. Exact: the objective is piecewise linear in the window
/// ends, so only breakpoints, breakpoints shifted by cap, and both closure
/// variants at each atom need to be considered.
WindowExtremum extreme_window(const BVPotential& p, const Interval& range, double cap, int sign,
                              bool closed_right, Execution ex = Execution::parallel);

struct BrinckReport {
  double cap;
  double sup_neg;      // sup over |J| <= cap of -\int_J dq
  double C;            // max(2, sup_neg)
  double lower_bound;  // -2 C^2
  Window witness;
};

BrinckReport brinck_constant(const BVPotential& p, double cap = 1.0,
                             Execution ex = Execution::parallel);

// Upper-side constant: brinck constant of the reflected measure -dq.
BrinckReport upper_brinck_constant(const BVPotential& p, double cap = 1.0,
                                   Execution ex = Execution::parallel);

// -2 C^2; C < 2 is rejected.
double lower_bound_estimate(double C);

namespace reference {

// O(K^2) enumeration over every candidate pair; the oracle for extreme_window.
WindowExtremum extreme_window_exhaustive(const BVPotential& p, const Interval& range, double cap,
                                         int sign, bool closed_right);
BrinckReport brinck_constant_exhaustive(const BVPotential& p, double cap = 1.0);

}  // namespace reference

struct MolchanovProfile {
  double h;
  std::vector<double> starts;            // sorted window positions a
  std::vector<double> window_integrals;  // \int_[a, a+h) dq
  std::vector<double> right_limits;      // lim_{s -> a+} \int_[s, s+h) dq
  std::vector<double> radii;             // distinct |a|, ascending
  std::vector<double> running_inf;       // inf over |a| >= radius
};

MolchanovProfile molchanov_profile(const BVPotential& p, double h, std::size_t n_starts,
                                   Execution ex = Execution::parallel);

enum class Evidence { discrete, essential, inconclusive };

std::string_view to_string(Evidence e);

struct DiscretenessVerdict {
  Evidence evidence;
  double inner_inf;  // running_inf at the inner edge_fraction mark
  double outer_inf;  // running_inf at the outer edge_fraction mark
  double spread;     // outer_inf - running_inf.front()
  std::string note;
};

// Heuristic read of a finite profile; a truncated domain cannot decide a limit
// at infinity, so the verdict is evidence only.
DiscretenessVerdict classify_discreteness(const MolchanovProfile& profile,
                                          double growth_factor = 2.0,
                                          double edge_fraction = 0.25);

}  // namespace qspec
