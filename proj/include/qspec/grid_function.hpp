#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qspec/error.hpp"

namespace qspec {

/// Continuous piecewise-linear function on a strictly increasing grid.
///
/// The derivative is the piecewise-constant slope of each cell. Evaluation
/// outside [front(), back()] returns zero, i.e. the function is extended by
/// zero, which is the convention the form evaluators rely on for compactly
/// supported arguments.
template <class T>
class BasicGridFunction {
 public:
  using value_type = T;

  BasicGridFunction(std::vector<double> grid, std::vector<T> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() < 2) throw InputError("grid function needs at least 2 points");
    if (grid_.size() != values_.size())
      throw InputError("grid function: grid and values differ in length");
    for (std::size_t i = 1; i < grid_.size(); ++i)
      if (!(grid_[i] > grid_[i - 1]))
        throw InputError("grid function: grid must be strictly increasing");
  }

  std::span<const double> grid() const { return grid_; }
  std::span<const T> values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  std::size_t cells() const { return grid_.size() - 1; }
  double front() const { return grid_.front(); }
  double back() const { return grid_.back(); }

  T slope(std::size_t cell) const {
    return (values_[cell + 1] - values_[cell]) / (grid_[cell + 1] - grid_[cell]);
  }

  // Index of the cell [grid[i], grid[i+1]] containing x (clamped to the span).
  std::size_t cell_of(double x) const {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
    return std::min(i, cells() - 1);
  }

  T operator()(double x) const {
    if (x < grid_.front() || x > grid_.back()) return T{};
    const std::size_t i = cell_of(x);
    const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + t * (values_[i + 1] - values_[i]);
  }

  template <class F>
  auto map(F&& f) const {
    using R = std::decay_t<decltype(f(values_[0]))>;
    std::vector<R> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), f);
    return BasicGridFunction<R>(grid_, std::move(out));
  }

 private:
  std::vector<double> grid_;
  std::vector<T> values_;
};

using GridFunction = BasicGridFunction<double>;
using ComplexGridFunction = BasicGridFunction<std::complex<double>>;

inline ComplexGridFunction to_complex(const GridFunction& f) {
  return f.map([](double v) { return std::complex<double>(v, 0.0); });
}

// Sample a callable on a grid.
template <class F>
auto sample(std::vector<double> grid, F&& f) {
  using R = std::decay_t<decltype(f(grid[0]))>;
  std::vector<R> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  return BasicGridFunction<R>(std::move(grid), std::move(v));
}

std::vector<double> linspace(double a, double b, std::size_t n);

// Sorted union of two sorted ranges restricted to [a, b], with a and b included.
std::vector<double> merged_breaks(std::span<const double> p, std::span<const double> q, double a,
                                  double b);

// Exact integrals of the piecewise-linear interpolants over [a, b] (zero outside the spans).
double l2_norm_sq(const GridFunction& f, double a, double b);
double l2_norm_sq(const ComplexGridFunction& f, double a, double b);
double derivative_norm_sq(const GridFunction& f, double a, double b);
double derivative_norm_sq(const ComplexGridFunction& f, double a, double b);
std::complex<double> inner_product(const ComplexGridFunction& u, const ComplexGridFunction& v,
                                   double a, double b);
std::complex<double> derivative_inner_product(const ComplexGridFunction& u,
                                              const ComplexGridFunction& v, double a, double b);

inline double l2_norm_sq(const GridFunction& f) { return l2_norm_sq(f, f.front(), f.back()); }
inline double derivative_norm_sq(const GridFunction& f) {
  return derivative_norm_sq(f, f.front(), f.back());
}

// Var_[a,b] f and the extrema of |f|^2 over [a, b] (interior minima of convex cells included).
double total_variation(const GridFunction& f, double a, double b);
double min_abs_sq(const GridFunction& f, double a, double b);
double max_abs_sq(const GridFunction& f, double a, double b);
double min_value(const GridFunction& f, double a, double b);

}  // namespace qspec
