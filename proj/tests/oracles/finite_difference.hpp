#pragma once

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "qspec/measure.hpp"

namespace qspec::oracle {

// Second-order finite differences for -u'' + q' u = lambda u with u = 0 at both
// ends, on a grid of spacing about h that contains every atom. At an atom node the
// jump condition u'(x+) - u'(x-) = w u(x) replaces the second difference, which is
// the same as adding w / h_mean to the diagonal. Densities enter pointwise.
inline std::vector<double> fd_eigenvalues(const BVPotential& p, double h, int count) {
  std::vector<double> x{p.lo()};
  std::vector<double> stops(p.atom_positions().begin(), p.atom_positions().end());
  stops.push_back(p.hi());
  for (double s : stops) {
    const double a = x.back();
    const int n = std::max(1, static_cast<int>(std::ceil((s - a) / h)));
    for (int i = 1; i <= n; ++i) x.push_back(i == n ? s : a + (s - a) * i / n);
  }
  const std::size_t n = x.size() - 2;  // interior unknowns
  std::vector<double> diag(n), sub(n - 1);
  std::vector<double> mean_h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hm = x[i + 1] - x[i], hp = x[i + 2] - x[i + 1];
    mean_h[i] = 0.5 * (hm + hp);
    const double xi = x[i + 1];
    const double dens = 0.5 * (p.density_at(xi, Side::left) + p.density_at(xi, Side::right));
    diag[i] =
        (1.0 / hm + 1.0 / hp + p.atom_weight_at(xi)) / mean_h[i] + dens;
  }
  // Symmetrize with the diagonal weights mean_h.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double hp = x[i + 2] - x[i + 1];
    sub[i] = -1.0 / hp / std::sqrt(mean_h[i] * mean_h[i + 1]);
  }
  // Lowest `count` eigenvalues by bisection on the symmetric tridiagonal matrix.
  lapack_int found = 0;
  std::vector<double> w(n), z(1);
  std::vector<lapack_int> ifail(n);
  const lapack_int info =
      LAPACKE_dstevx(LAPACK_COL_MAJOR, 'N', 'I', static_cast<lapack_int>(n), diag.data(), sub.data(),
                     0.0, 0.0, 1, count, 0.0, &found, w.data(), z.data(), 1, ifail.data());
  if (info != 0 || found != count) throw std::runtime_error("dstevx failed");
  return {w.begin(), w.begin() + count};
}

}  // namespace qspec::oracle
