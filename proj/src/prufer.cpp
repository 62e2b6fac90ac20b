#include "qspec/prufer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qspec/error.hpp"

namespace qspec {

using std::numbers::pi;

PrueferState shear(PrueferState s, double shift) {
  if (shift == 0.0) return s;
  const double turns = std::floor(s.theta / pi);
  const double alpha = s.theta - turns * pi;
  const double sa = std::sin(alpha);
  const double t = std::cos(alpha) + shift * sa;
  s.theta = turns * pi + std::atan2(sa, t);
  s.rho += 0.5 * std::log(sa * sa + t * t);
  return s;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

struct Deriv {
  double theta;
  double rho;
};

class Integrator {
 public:
  Integrator(const BVPotential& p, double lambda, double tol, PropagationStats* stats)
      : p_(p), lambda_(lambda), tol_(tol), stats_(stats) {
    if (!(tol > 0.0)) throw InputError("propagate: tolerance must be positive");
    if (!std::isfinite(lambda)) throw InputError("propagate: lambda must be finite");
  }

  void reset(const PrueferState& canonical) {
    local_ = canonical;
    gauge_ = 0.0;
  }

  PrueferState canonical() const {
    PrueferState s = shear(local_, -gauge_);
    s.x = local_.x;
    return s;
  }

  // Advance the local state to `target`, splitting at breakpoints.
  void advance(double target) {
    const double dir = target >= local_.x ? 1.0 : -1.0;
    const auto br = p_.breakpoints();
    while (local_.x != target) {
      const double x = local_.x;
      double seg_end = target;
      if (dir > 0) {
        auto it = std::upper_bound(br.begin(), br.end(), x);
        if (it != br.end() && *it < seg_end) seg_end = *it;
      } else {
        auto it = std::lower_bound(br.begin(), br.end(), x);
        if (it != br.begin() && *(it - 1) > seg_end) seg_end = *(it - 1);
      }
      const Side side = dir > 0 ? Side::right : Side::left;
      const double d = p_.density_at(x, side);
      const double q0 = p_.q(x, side);
      // Keep |q - gauge| <= 1 on every piece.
      double piece_end = seg_end;
      if (std::abs(d) * std::abs(seg_end - x) > 1.0) piece_end = x + dir / std::abs(d);
      const double q1 = q0 + d * (piece_end - x);
      if (std::max(std::abs(q0 - gauge_), std::abs(q1 - gauge_)) > 1.0) {
        const double g = 0.5 * (q0 + q1);
        const double xx = local_.x;
        local_ = shear(local_, g - gauge_);
        local_.x = xx;
        gauge_ = g;
      }
      integrate_piece(piece_end, q0 - gauge_, d);
    }
  }

 private:
  Deriv rhs(double qt, double theta) const {
    const double s = std::sin(theta), c = std::cos(theta);
    const double k = c + qt * s;
    return {k * k + lambda_ * s * s, (1.0 - lambda_ - qt * qt) * s * c - qt * (c * c - s * s)};
  }

  // q~(y) = qs + d (y - x_start) on the piece.
  void integrate_piece(double end, double qs, double d) {
    const double x0 = local_.x;
    const double dir = end >= x0 ? 1.0 : -1.0;
    const double qmax = std::max(std::abs(qs), std::abs(qs + d * (end - x0)));
    const double speed = (1.0 + qmax) * (1.0 + qmax) + std::abs(lambda_);
    const double h_barrier = 0.5 * pi / speed;
    auto qt = [&](double y) { return qs + d * (y - x0); };

    double x = x0, th = local_.theta, rh = local_.rho;
    double h = std::min({h_next_, h_barrier, std::abs(end - x0)});
    Deriv k1 = rhs(qt(x), th);
    while (x != end) {
      const double remaining = std::abs(end - x);
      bool last = false;
      if (h >= remaining) {
        h = remaining;
        last = true;
      }
      const double hs = dir * h;
      const Deriv k2 = rhs(qt(x + c2 * hs), th + hs * a21 * k1.theta);
      const Deriv k3 = rhs(qt(x + c3 * hs), th + hs * (a31 * k1.theta + a32 * k2.theta));
      const Deriv k4 =
          rhs(qt(x + c4 * hs), th + hs * (a41 * k1.theta + a42 * k2.theta + a43 * k3.theta));
      const Deriv k5 = rhs(qt(x + c5 * hs), th + hs * (a51 * k1.theta + a52 * k2.theta +
                                                       a53 * k3.theta + a54 * k4.theta));
      const Deriv k6 = rhs(qt(x + hs), th + hs * (a61 * k1.theta + a62 * k2.theta +
                                                  a63 * k3.theta + a64 * k4.theta +
                                                  a65 * k5.theta));
      const double th_new =
          th + hs * (b1 * k1.theta + b3 * k3.theta + b4 * k4.theta + b5 * k5.theta + b6 * k6.theta);
      const double rh_new =
          rh + hs * (b1 * k1.rho + b3 * k3.rho + b4 * k4.rho + b5 * k5.rho + b6 * k6.rho);
      const double x_new = last ? end : x + hs;
      const Deriv k7 = rhs(qt(x_new), th_new);
      const double err_th = hs * (e1 * k1.theta + e3 * k3.theta + e4 * k4.theta + e5 * k5.theta +
                                  e6 * k6.theta + e7 * k7.theta);
      const double err_rh = hs * (e1 * k1.rho + e3 * k3.rho + e4 * k4.rho + e5 * k5.rho +
                                  e6 * k6.rho + e7 * k7.rho);
      const double err = std::max(std::abs(err_th), std::abs(err_rh)) / tol_;
      if (!std::isfinite(th_new) || !std::isfinite(rh_new) || !std::isfinite(err))
        throw NumericError("propagate: non-finite state at x = " + std::to_string(x));

      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        x = x_new;
        th = th_new;
        rh = rh_new;
        k1 = k7;
        if (stats_) ++stats_->steps;
        // Do not let the final, remainder-sized step shrink the next proposal.
        if (!last) h_next_ = std::min(h * factor, h_barrier);
        else h_next_ = std::max(h_next_, std::min(h * factor, h_barrier));
        h = std::min(h * factor, h_barrier);
      } else {
        if (stats_) ++stats_->rejected;
        h *= std::max(factor, 0.1);
        if (h < 1e-14 * std::max(1.0, std::abs(x)))
          throw NumericError("propagate: step size underflow at x = " + std::to_string(x));
      }
      if (++guard_ > 50'000'000) throw NumericError("propagate: step budget exhausted");
    }
    local_.theta = th;
    local_.rho = rh;
    local_.x = end;
  }

  const BVPotential& p_;
  double lambda_;
  double tol_;
  PropagationStats* stats_;
  PrueferState local_;
  double gauge_ = 0.0;
  double h_next_ = 0.05;
  long guard_ = 0;
};

void require_inside(const BVPotential& p, double x) {
  if (!(x >= p.lo() && x <= p.hi()))
    throw std::out_of_range("propagate: position " + std::to_string(x) + " outside the domain");
}

}  // namespace

std::vector<PrueferState> propagate_through(const BVPotential& p, double lambda,
                                            PrueferState start, std::span<const double> stops,
                                            double tol, PropagationStats* stats) {
  require_inside(p, start.x);
  if (!std::isfinite(start.theta) || !std::isfinite(start.rho))
    throw InputError("propagate: non-finite initial state");
  Integrator integ(p, lambda, tol, stats);
  integ.reset(start);
  std::vector<PrueferState> out;
  out.reserve(stops.size());
  double prev = start.x;
  int dir = 0;
  for (double stop : stops) {
    require_inside(p, stop);
    const int d = stop > prev ? 1 : (stop < prev ? -1 : 0);
    if (d != 0 && dir != 0 && d != dir)
      throw InputError("propagate_through: stops must be monotone in the direction of travel");
    if (d != 0) dir = d;
    integ.advance(stop);
    out.push_back(integ.canonical());
    prev = stop;
  }
  return out;
}

PrueferState propagate(const BVPotential& p, double lambda, double to, PrueferState start,
                       double tol, PropagationStats* stats) {
  const double stops[] = {to};
  return propagate_through(p, lambda, start, stops, tol, stats).front();
}

QuasiPair quasi_pair(const PrueferState& s, double log_ref) {
  const double r = std::exp(s.rho - log_ref);
  return {r * std::sin(s.theta), r * std::cos(s.theta)};
}

double classical_derivative(const BVPotential& p, const PrueferState& s, Side side,
                            double log_ref) {
  const QuasiPair qp = quasi_pair(s, log_ref);
  return qp.u_quasi + p.q(s.x, side) * qp.u;
}

SampledSolution solution_at(const BVPotential& p, double lambda, double theta0,
                            std::span<const double> xs, double tol) {
  if (xs.size() < 2) throw InputError("solution_at: need at least 2 sample points");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw InputError("solution_at: sample points must increase");
  auto states = propagate_through(p, lambda, PrueferState{theta0, 0.0, xs.front()}, xs, tol);
  double ref = states.front().rho;
  for (const auto& s : states) ref = std::max(ref, s.rho);
  std::vector<double> u(states.size()), v(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto qp = quasi_pair(states[i], ref);
    u[i] = qp.u;
    v[i] = qp.u_quasi;
  }
  std::vector<double> grid(xs.begin(), xs.end());
  return {GridFunction(grid, std::move(u)), GridFunction(grid, std::move(v)), std::move(states),
          ref};
}

}  // namespace qspec
