#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qspec/grid_function.hpp"

namespace qspec {

/// Half-open interval [a, b) with a < b.
struct Interval {
  double a;
  double b;

  Interval(double lo, double hi) : a(lo), b(hi) {
    if (!(lo < hi)) throw InputError("interval requires a < b");
  }
  double length() const { return b - a; }
  bool contains(double x) const { return a <= x && x < b; }
};

enum class Side { left, right };

struct Atom {
  double x;
  double w;
};

/// A real measure dq on [lo, hi]: piecewise-constant density plus point atoms.
///
/// q is the left-continuous primitive normalized by q(lo) = 0, so
/// q(x, left) = \int_{[lo, x)} dq and the right limit additionally picks up
/// the atom sitting at x. Immutable after construction.
class BVPotential {
 public:
  // knots: strictly increasing, knots.front() == lo, knots.back() == hi.
  // density: one value per cell, density.size() == knots.size() - 1.
  // atoms: strictly increasing positions inside (lo, hi), nonzero weights.
  BVPotential(std::vector<double> knots, std::vector<double> density, std::vector<Atom> atoms);

  static BVPotential zero(double lo, double hi);

  double lo() const { return knots_.front(); }
  double hi() const { return knots_.back(); }
  Interval domain() const { return {lo(), hi()}; }

  std::span<const double> knots() const { return knots_; }
  std::span<const double> density() const { return density_; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const double> atom_positions() const { return atom_x_; }

  // Sorted union of density knots and atom positions.
  std::span<const double> breakpoints() const { return breaks_; }

  // Density of the cell adjacent to x on the given side (cells are [k_i, k_{i+1})).
  double density_at(double x, Side side = Side::right) const;
  double atom_weight_at(double x) const;

  // One-sided values of the primitive. Throws std::out_of_range outside [lo, hi].
  double q(double x, Side side = Side::left) const;

  bool has_atoms() const { return !atoms_.empty(); }

 private:
  std::size_t cell_index(double x, Side side) const;
  double absolutely_continuous_part(double x) const;

  std::vector<double> knots_;
  std::vector<double> density_;
  std::vector<Atom> atoms_;
  std::vector<double> atom_x_;
  std::vector<double> knot_q_;      // \int_lo^{knot_i} q'_ac dx
  std::vector<double> atom_cumsum_; // sum of weights of atoms[0..i]
  std::vector<double> breaks_;
};

// \int_{[a,b)} dq = q(b-) - q(a-).
double measure_of(const BVPotential& p, const Interval& j);

// \int_{[a,b)} f dq for the piecewise-linear interpolant of f, exact.
double stieltjes_integral(const BVPotential& p, const GridFunction& f, const Interval& j);

// \int_{[a,b)} u conj(v) dq for piecewise-linear u, v (the product is a piecewise
// quadratic and is integrated exactly). u, v are taken as zero outside their spans.
std::complex<double> stieltjes_pairing(const BVPotential& p, const ComplexGridFunction& u,
                                       const ComplexGridFunction& v, const Interval& j);
double stieltjes_abs_sq(const BVPotential& p, const GridFunction& u, const Interval& j);

double total_variation(const BVPotential& p, const Interval& j);

// Density incremented by s everywhere; atoms unchanged.
BVPotential shift_measure(const BVPotential& p, double s);

// The same measure restricted to the closed window [j.a, j.b]; atoms on the
// window ends are dropped. The primitive is renormalized to vanish at j.a.
BVPotential restrict_to(const BVPotential& p, const Interval& j);

// The measure -dq.
BVPotential reflect(const BVPotential& p);

}  // namespace qspec
