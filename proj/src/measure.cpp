#include "qspec/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qspec {

BVPotential::BVPotential(std::vector<double> knots, std::vector<double> density,
                         std::vector<Atom> atoms)
    : knots_(std::move(knots)), density_(std::move(density)), atoms_(std::move(atoms)) {
  if (knots_.size() < 2) throw InputError("potential needs at least two density knots");
  if (density_.size() + 1 != knots_.size())
    throw InputError("potential: need exactly one density value per cell");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i])) throw InputError("potential: non-finite knot");
    if (i > 0 && !(knots_[i] > knots_[i - 1]))
      throw InputError("potential: density knots must be strictly increasing");
  }
  for (double d : density_)
    if (!std::isfinite(d)) throw InputError("potential: non-finite density value");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (!std::isfinite(a.x) || !std::isfinite(a.w)) throw InputError("potential: non-finite atom");
    if (!(a.x > lo() && a.x < hi()))
      throw InputError("potential: atom at " + std::to_string(a.x) + " is not inside the domain");
    if (a.w == 0.0) throw InputError("potential: zero-weight atom at " + std::to_string(a.x));
    if (i > 0 && !(a.x > atoms_[i - 1].x))
      throw InputError("potential: atom positions must be strictly increasing");
  }

  knot_q_.resize(knots_.size());
  knot_q_[0] = 0.0;
  for (std::size_t i = 0; i < density_.size(); ++i)
    knot_q_[i + 1] = knot_q_[i] + density_[i] * (knots_[i + 1] - knots_[i]);

  atom_x_.reserve(atoms_.size());
  atom_cumsum_.reserve(atoms_.size());
  double acc = 0.0;
  for (const Atom& a : atoms_) {
    atom_x_.push_back(a.x);
    acc += a.w;
    atom_cumsum_.push_back(acc);
  }

  breaks_.reserve(knots_.size() + atom_x_.size());
  std::merge(knots_.begin(), knots_.end(), atom_x_.begin(), atom_x_.end(),
             std::back_inserter(breaks_));
  breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
}

BVPotential BVPotential::zero(double lo, double hi) {
  if (!(lo < hi)) throw InputError("potential: empty domain");
  return BVPotential({lo, hi}, {0.0}, {});
}

std::size_t BVPotential::cell_index(double x, Side side) const {
  const auto last = density_.size() - 1;
  if (side == Side::right) {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    if (it == knots_.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - knots_.begin()) - 1, last);
  }
  auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin()) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(it - knots_.begin()) - 1, last);
}

double BVPotential::density_at(double x, Side side) const { return density_[cell_index(x, side)]; }

double BVPotential::atom_weight_at(double x) const {
  auto it = std::lower_bound(atom_x_.begin(), atom_x_.end(), x);
  if (it != atom_x_.end() && *it == x) return atoms_[static_cast<std::size_t>(it - atom_x_.begin())].w;
  return 0.0;
}

double BVPotential::absolutely_continuous_part(double x) const {
  const std::size_t i = cell_index(x, Side::right);
  return knot_q_[i] + density_[i] * (x - knots_[i]);
}

double BVPotential::q(double x, Side side) const {
  if (!(x >= lo() && x <= hi()))
    throw std::out_of_range("q: position " + std::to_string(x) + " outside the domain");
  const auto it = side == Side::left ? std::lower_bound(atom_x_.begin(), atom_x_.end(), x)
                                     : std::upper_bound(atom_x_.begin(), atom_x_.end(), x);
  const auto count = static_cast<std::size_t>(it - atom_x_.begin());
  const double jumps = count == 0 ? 0.0 : atom_cumsum_[count - 1];
  return absolutely_continuous_part(x) + jumps;
}

namespace {

void require_inside(const BVPotential& p, const Interval& j, const char* what) {
  if (j.a < p.lo() || j.b > p.hi())
    throw std::out_of_range(std::string(what) + ": interval outside the potential's domain");
}

}  // namespace

double measure_of(const BVPotential& p, const Interval& j) {
  require_inside(p, j, "measure_of");
  return p.q(j.b, Side::left) - p.q(j.a, Side::left);
}

double stieltjes_integral(const BVPotential& p, const GridFunction& f, const Interval& j) {
  require_inside(p, j, "stieltjes_integral");
  if (j.a < f.front() || j.b > f.back())
    throw std::out_of_range("stieltjes_integral: interval outside the function's grid span");
  const auto br = merged_breaks(f.grid(), p.knots(), j.a, j.b);
  double sum = 0.0;
  double f0 = f(br[0]);
  for (std::size_t i = 1; i < br.size(); ++i) {
    const double f1 = f(br[i]);
    const double h = br[i] - br[i - 1];
    sum += p.density_at(0.5 * (br[i] + br[i - 1])) * h * 0.5 * (f0 + f1);
    f0 = f1;
  }
  const auto xs = p.atom_positions();
  for (auto it = std::lower_bound(xs.begin(), xs.end(), j.a); it != xs.end() && *it < j.b; ++it)
    sum += p.atoms()[static_cast<std::size_t>(it - xs.begin())].w * f(*it);
  return sum;
}

std::complex<double> stieltjes_pairing(const BVPotential& p, const ComplexGridFunction& u,
                                       const ComplexGridFunction& v, const Interval& j) {
  require_inside(p, j, "stieltjes_pairing");
  std::complex<double> sum{};
  const double a = std::max({j.a, u.front(), v.front()});
  const double b = std::min({j.b, u.back(), v.back()});
  if (b > a) {
    const auto uv = merged_breaks(u.grid(), v.grid(), a, b);
    const auto br = merged_breaks(uv, p.knots(), a, b);
    auto u0 = u(br[0]), v0 = v(br[0]);
    for (std::size_t i = 1; i < br.size(); ++i) {
      const auto u1 = u(br[i]), v1 = v(br[i]);
      const double h = br[i] - br[i - 1];
      const auto mid = 0.25 * (u0 + u1) * std::conj(v0 + v1);
      const auto cell = h / 6.0 * (u0 * std::conj(v0) + 4.0 * mid + u1 * std::conj(v1));
      sum += p.density_at(0.5 * (br[i] + br[i - 1])) * cell;
      u0 = u1;
      v0 = v1;
    }
  }
  const auto xs = p.atom_positions();
  for (auto it = std::lower_bound(xs.begin(), xs.end(), j.a); it != xs.end() && *it < j.b; ++it)
    sum += p.atoms()[static_cast<std::size_t>(it - xs.begin())].w * u(*it) * std::conj(v(*it));
  return sum;
}

double stieltjes_abs_sq(const BVPotential& p, const GridFunction& u, const Interval& j) {
  const auto cu = to_complex(u);
  return stieltjes_pairing(p, cu, cu, j).real();
}

double total_variation(const BVPotential& p, const Interval& j) {
  require_inside(p, j, "total_variation");
  double var = 0.0;
  const auto k = p.knots();
  const auto d = p.density();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double lo = std::max(j.a, k[i]);
    const double hi = std::min(j.b, k[i + 1]);
    if (hi > lo) var += std::abs(d[i]) * (hi - lo);
  }
  const auto xs = p.atom_positions();
  for (auto it = std::lower_bound(xs.begin(), xs.end(), j.a); it != xs.end() && *it < j.b; ++it)
    var += std::abs(p.atoms()[static_cast<std::size_t>(it - xs.begin())].w);
  return var;
}

BVPotential shift_measure(const BVPotential& p, double s) {
  std::vector<double> d(p.density().begin(), p.density().end());
  for (double& v : d) v += s;
  return BVPotential({p.knots().begin(), p.knots().end()}, std::move(d),
                     {p.atoms().begin(), p.atoms().end()});
}

BVPotential restrict_to(const BVPotential& p, const Interval& j) {
  require_inside(p, j, "restrict_to");
  std::vector<double> knots{j.a};
  std::vector<double> density;
  const auto k = p.knots();
  for (double x : k)
    if (x > j.a && x < j.b) knots.push_back(x);
  knots.push_back(j.b);
  density.reserve(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    density.push_back(p.density_at(0.5 * (knots[i] + knots[i + 1])));
  std::vector<Atom> atoms;
  for (const Atom& a : p.atoms())
    if (a.x > j.a && a.x < j.b) atoms.push_back(a);
  return BVPotential(std::move(knots), std::move(density), std::move(atoms));
}

BVPotential reflect(const BVPotential& p) {
  std::vector<double> d(p.density().begin(), p.density().end());
  for (double& v : d) v = -v;
  std::vector<Atom> atoms(p.atoms().begin(), p.atoms().end());
  for (Atom& a : atoms) a.w = -a.w;
  return BVPotential({p.knots().begin(), p.knots().end()}, std::move(d), std::move(atoms));
}

}  // namespace qspec
