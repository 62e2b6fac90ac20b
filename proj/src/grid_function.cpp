#include "qspec/grid_function.hpp"

#include <cmath>
#include <limits>

namespace qspec {

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2) throw InputError("linspace needs at least 2 points");
  std::vector<double> x(n);
  const double step = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = a + step * static_cast<double>(i);
  x.back() = b;
  return x;
}

std::vector<double> merged_breaks(std::span<const double> p, std::span<const double> q, double a,
                                  double b) {
  std::vector<double> out;
  out.reserve(p.size() + q.size() + 2);
  out.push_back(a);
  auto pi = std::upper_bound(p.begin(), p.end(), a);
  auto qi = std::upper_bound(q.begin(), q.end(), a);
  while (true) {
    const double pv = (pi != p.end() && *pi < b) ? *pi : b;
    const double qv = (qi != q.end() && *qi < b) ? *qi : b;
    const double next = std::min(pv, qv);
    if (next >= b) break;
    if (next > out.back()) out.push_back(next);
    if (pv == next) ++pi;
    if (qv == next) ++qi;
  }
  if (b > out.back()) out.push_back(b);
  return out;
}

namespace {

// Clip [a, b] to the span of f; returns false when the overlap is empty.
template <class T>
bool clip(const BasicGridFunction<T>& f, double& a, double& b) {
  a = std::max(a, f.front());
  b = std::min(b, f.back());
  return b > a;
}

template <class T>
double norm_sq_impl(const BasicGridFunction<T>& f, double a, double b) {
  if (!clip(f, a, b)) return 0.0;
  const auto br = merged_breaks(f.grid(), {}, a, b);
  double sum = 0.0;
  T prev = f(br[0]);
  for (std::size_t i = 1; i < br.size(); ++i) {
    const T cur = f(br[i]);
    const double h = br[i] - br[i - 1];
    sum += h * (std::norm(prev) + std::real(prev * std::conj(cur)) + std::norm(cur)) / 3.0;
    prev = cur;
  }
  return sum;
}

template <class T>
double deriv_norm_sq_impl(const BasicGridFunction<T>& f, double a, double b) {
  if (!clip(f, a, b)) return 0.0;
  const auto br = merged_breaks(f.grid(), {}, a, b);
  double sum = 0.0;
  T prev = f(br[0]);
  for (std::size_t i = 1; i < br.size(); ++i) {
    const T cur = f(br[i]);
    sum += std::norm(cur - prev) / (br[i] - br[i - 1]);
    prev = cur;
  }
  return sum;
}

}  // namespace

double l2_norm_sq(const GridFunction& f, double a, double b) { return norm_sq_impl(f, a, b); }
double l2_norm_sq(const ComplexGridFunction& f, double a, double b) {
  return norm_sq_impl(f, a, b);
}
double derivative_norm_sq(const GridFunction& f, double a, double b) {
  return deriv_norm_sq_impl(f, a, b);
}
double derivative_norm_sq(const ComplexGridFunction& f, double a, double b) {
  return deriv_norm_sq_impl(f, a, b);
}

std::complex<double> inner_product(const ComplexGridFunction& u, const ComplexGridFunction& v,
                                   double a, double b) {
  a = std::max({a, u.front(), v.front()});
  b = std::min({b, u.back(), v.back()});
  if (!(b > a)) return {};
  const auto br = merged_breaks(u.grid(), v.grid(), a, b);
  std::complex<double> sum{};
  auto u0 = u(br[0]), v0 = v(br[0]);
  for (std::size_t i = 1; i < br.size(); ++i) {
    const auto u1 = u(br[i]), v1 = v(br[i]);
    const double h = br[i] - br[i - 1];
    sum += h / 6.0 *
           (2.0 * u0 * std::conj(v0) + u0 * std::conj(v1) + u1 * std::conj(v0) +
            2.0 * u1 * std::conj(v1));
    u0 = u1;
    v0 = v1;
  }
  return sum;
}

std::complex<double> derivative_inner_product(const ComplexGridFunction& u,
                                              const ComplexGridFunction& v, double a, double b) {
  a = std::max({a, u.front(), v.front()});
  b = std::min({b, u.back(), v.back()});
  if (!(b > a)) return {};
  const auto br = merged_breaks(u.grid(), v.grid(), a, b);
  std::complex<double> sum{};
  auto u0 = u(br[0]), v0 = v(br[0]);
  for (std::size_t i = 1; i < br.size(); ++i) {
    const auto u1 = u(br[i]), v1 = v(br[i]);
    sum += (u1 - u0) * std::conj(v1 - v0) / (br[i] - br[i - 1]);
    u0 = u1;
    v0 = v1;
  }
  return sum;
}

double total_variation(const GridFunction& f, double a, double b) {
  if (!clip(f, a, b)) return 0.0;
  const auto br = merged_breaks(f.grid(), {}, a, b);
  double var = 0.0;
  for (std::size_t i = 1; i < br.size(); ++i) var += std::abs(f(br[i]) - f(br[i - 1]));
  return var;
}

double min_abs_sq(const GridFunction& f, double a, double b) {
  if (!clip(f, a, b)) return 0.0;
  const auto br = merged_breaks(f.grid(), {}, a, b);
  double m = std::numeric_limits<double>::infinity();
  double prev = f(br[0]);
  m = prev * prev;
  for (std::size_t i = 1; i < br.size(); ++i) {
    const double cur = f(br[i]);
    if ((prev <= 0.0 && cur >= 0.0) || (prev >= 0.0 && cur <= 0.0)) return 0.0;
    m = std::min(m, cur * cur);
    prev = cur;
  }
  return m;
}

double max_abs_sq(const GridFunction& f, double a, double b) {
  if (!clip(f, a, b)) return 0.0;
  const auto br = merged_breaks(f.grid(), {}, a, b);
  double m = 0.0;
  for (double x : br) m = std::max(m, f(x) * f(x));
  return m;
}

double min_value(const GridFunction& f, double a, double b) {
  if (!clip(f, a, b)) return 0.0;
  const auto br = merged_breaks(f.grid(), {}, a, b);
  double m = std::numeric_limits<double>::infinity();
  for (double x : br) m = std::min(m, f(x));
  return m;
}

}  // namespace qspec
