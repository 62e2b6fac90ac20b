#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles/airy.hpp"
#include "oracles/finite_difference.hpp"
#include "qspec/potential_spec.hpp"
#include "qspec/spectral.hpp"
#include "test_support.hpp"

using namespace qspec;
using doctest::Approx;
using std::numbers::pi;

namespace {

BVPotential random_atoms(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> pos(lo + 0.05, hi - 0.05), w(-3.0, 3.0);
  std::uniform_int_distribution<int> n(1, 8);
  std::vector<double> xs;
  for (int i = 0, m = n(rng); i < m; ++i) xs.push_back(pos(rng));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<Atom> atoms;
  for (double x : xs) atoms.push_back({x, w(rng)});
  return BVPotential({lo, hi}, {0.0}, std::move(atoms));
}

}  // namespace

TEST_CASE("count_below: closed-form cases") {
  auto free = BVPotential::zero(0, pi);
  CHECK(count_below(free, free.domain(), 5.0, 1e-12) == 2);
  CHECK(count_below(free, free.domain(), 1.0, 1e-12) == 0);
  CHECK(count_below(free, free.domain(), 1.0 + 1e-8, 1e-12) == 1);
  CHECK(count_below(free, free.domain(), 0.5, 1e-12) == 0);

  auto well = make_single_delta(-20, 20, 0.0, -1.0);
  CHECK(count_below(well, well.domain(), 0.0, 1e-12) == 1);
  // Finite-difference cross-check of the same count.
  const auto fd = oracle::fd_eigenvalues(well, 2e-3, 3);
  CHECK(fd[0] < 0.0);
  CHECK(fd[1] > 0.0);
}

TEST_CASE("eigenvalue: free operator on [0, pi]") {
  auto free = BVPotential::zero(0, pi);
  for (int k = 0; k < 10; ++k)
    CHECK(eigenvalue(free, free.domain(), k, {}) == Approx((k + 1.0) * (k + 1.0)).epsilon(1e-10));
}

TEST_CASE("eigenvalue: single delta bound state") {
  auto well = make_single_delta(-20, 20, 0.0, -1.0);
  const double l0 = eigenvalue(well, well.domain(), 0, {});
  CHECK(std::abs(l0 + 0.25) < 1e-6);
  CHECK(eigenvalue(well, well.domain(), 1, {}) > 0.0);
  CHECK(std::abs(oracle::fd_eigenvalues(well, 2e-3, 1)[0] - l0) < 1e-4);
}

TEST_CASE("Airy oracle reproduces the tabulated levels") {
  const auto lv = oracle::abs_x_levels(5);
  const double table[] = {1.0187930, 2.3381074, 3.2481976, 4.0879494, 4.8200992};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(lv[i] - table[i]) < 6e-8);
}

TEST_CASE("eigenvalue: |x| potential against the Airy oracle") {
  auto p = make_abs_x(-20, 20, 1e-3);
  const auto lv = oracle::abs_x_levels(5);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(eigenvalue(p, p.domain(), k, {}) - lv[k]) < 1e-6);
}

TEST_CASE("eigenvalues match finite differences on atoms-only potentials") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_atoms(rng, -5, 5);
    // Richardson step on the second-order oracle.
    const auto coarse = oracle::fd_eigenvalues(p, 4e-3, 5);
    const auto fine = oracle::fd_eigenvalues(p, 2e-3, 5);
    for (int k = 0; k < 5; ++k) {
      const double ref = (4 * fine[k] - coarse[k]) / 3;
      CHECK(eigenvalue(p, p.domain(), k, {}) == Approx(ref).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("counting consistency around each eigenvalue") {
  std::mt19937_64 rng(31);
  const SolverTolerances tol{1e-10, 1e-12};
  for (int trial = 0; trial < 15; ++trial) {
    auto p = testing::random_potential(rng, -3, 3);
    for (int k = 0; k < 4; ++k) {
      const double lk = eigenvalue(p, p.domain(), k, tol);
      const double eps = 10 * tol.lambda;
      CHECK(count_below(p, p.domain(), lk - eps, tol.ode) == k);
      CHECK(count_below(p, p.domain(), lk + eps, tol.ode) == k + 1);
    }
  }
}

TEST_CASE("eigenvalues are ascending and respect the lower bound") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = testing::random_potential(rng, -4, 4, 6, 10, 4.0, 3.0);
    const double bound = brinck_constant(p).lower_bound;
    double prev = -1e300;
    for (int k = 0; k < 4; ++k) {
      const double lk = eigenvalue(p, p.domain(), k, {});
      CHECK(lk > prev);
      CHECK(lk >= bound - 1e-9);
      prev = lk;
    }
  }
}

TEST_CASE("Dirichlet domain monotonicity") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = testing::random_potential(rng, -6, 6);
    for (int k = 0; k < 3; ++k) {
      double prev = 1e300;
      for (double L : {2.0, 3.5, 6.0}) {
        const double lk = eigenvalue(p, Interval(-L, L), k, {});
        CHECK(lk <= prev + 1e-9);
        prev = lk;
      }
    }
  }
}

TEST_CASE("eigenfunction: free ground state") {
  auto free = BVPotential::zero(0, pi);
  const auto xs = eigen_grid(free, free.domain(), 2001);
  const auto ep = eigenfunction(free, free.domain(), 0, xs, {});
  CHECK(ep.lambda == Approx(1.0).epsilon(1e-10));
  CHECK(l2_norm_sq(ep.u) == Approx(1.0).epsilon(1e-8));
  CHECK(ep.u.values().front() == 0.0);
  CHECK(std::abs(ep.u.values().back()) < 1e-6);
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    worst = std::max(worst, std::abs(ep.u.values()[i] - std::sqrt(2 / pi) * std::sin(xs[i])));
  // The piecewise-linear L^2 norm differs from the exact one by O(h^2).
  CHECK(worst < 1e-6);
}

TEST_CASE("eigenfunction: delta well ground state is even with the right kink") {
  auto well = make_single_delta(-20, 20, 0.0, -1.0);
  const auto xs = eigen_grid(well, well.domain(), 40001);
  const auto ep = eigenfunction(well, well.domain(), 0, xs, {});
  CHECK(l2_norm_sq(ep.u) == Approx(1.0).epsilon(1e-8));
  for (double x : {0.5, 2.0, 7.0}) CHECK(ep.u(x) == Approx(ep.u(-x)).epsilon(1e-7));
  // Closed form: u = sqrt(kappa) exp(-kappa |x|) with kappa = 1/2.
  CHECK(ep.u(0.0) == Approx(std::sqrt(0.5)).epsilon(1e-5));
  // u' = u^[1] + q u on either side of the atom.
  const double u0 = ep.u(0.0), v0 = ep.u_quasi(0.0);
  const double jump = (v0 + well.q(0.0, Side::right) * u0) - (v0 + well.q(0.0, Side::left) * u0);
  CHECK(jump == Approx(-u0));
  // Difference quotients see the same kink.
  const double h = 1e-3;
  const double dq = (ep.u(h) - u0) / h - (u0 - ep.u(-h)) / h;
  CHECK(dq == Approx(-u0).epsilon(2e-3));
}

TEST_CASE("eigenfunction: excited states and random potentials stay normalized") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = testing::random_potential(rng, -3, 3);
    const auto xs = eigen_grid(p, p.domain(), 3001);
    for (int k = 0; k < 3; ++k) {
      const auto ep = eigenfunction(p, p.domain(), k, xs, {});
      CHECK(l2_norm_sq(ep.u) == Approx(1.0).epsilon(1e-8));
      CHECK(ep.u.values().front() == 0.0);
      CHECK(std::abs(ep.u.values().back()) < 1e-6);
      // k interior sign changes.
      int changes = 0;
      double last = 0.0;
      for (double v : ep.u.values()) {
        if (std::abs(v) < 1e-9) continue;
        if (last != 0.0 && (v > 0) != (last > 0)) ++changes;
        last = v;
      }
      CHECK(changes == k);
    }
  }
}

TEST_CASE("spectrum_scan: free operator grows like the Weyl count") {
  auto free = BVPotential::zero(-40, 40);
  ScanConfig cfg;
  cfg.L_list = {10, 20, 40};
  cfg.k_max = 3;
  cfg.E_ref = 1.0;
  const auto rep = spectrum_scan(free, cfg);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(rep.counts[i] == static_cast<int>(std::floor(2 * cfg.L_list[i] / pi)));
  CHECK(rep.evidence == Evidence::essential);
  CHECK(rep.failures == 0);
  CHECK(rep.lower_bound_ok);
  CHECK(rep.worst_monotonicity <= 0.0);
  for (const auto& row : rep.rows) {
    const double exact = std::pow((row.k + 1) * pi / (2 * row.L), 2);
    CHECK(row.lambda == Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("spectrum_scan: serial and parallel agree") {
  auto p = make_paper_comb(0, 12, 1.0, AlphaRule::constant);
  ScanConfig cfg;
  cfg.L_list = {6, 9, 12};
  cfg.k_max = 3;
  cfg.E_ref = 6.0;
  cfg.truncation = Truncation::half_line;
  const auto a = spectrum_scan(p, cfg, Execution::serial);
  const auto b = spectrum_scan(p, cfg, Execution::parallel);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].lambda == b.rows[i].lambda);
  CHECK(a.counts == b.counts);
  CHECK(a.C == b.C);
}

TEST_CASE("spectral: error paths") {
  auto free = BVPotential::zero(0, 1);
  CHECK_THROWS_AS(eigenvalue(free, free.domain(), -1, {}), InputError);
  CHECK_THROWS_AS(eigenvalue(free, Interval(0, 2), 0, {}), std::out_of_range);
  CHECK_THROWS_AS(eigenvalue(free, free.domain(), 0, {0.0, 1e-10}), InputError);
  ScanConfig cfg;
  cfg.L_list = {0.5, 0.4};
  CHECK_THROWS_AS(spectrum_scan(free, cfg), InputError);
  cfg.L_list = {2.0};
  CHECK_THROWS_AS(spectrum_scan(free, cfg), std::out_of_range);
  const double bad[] = {0.0, 0.5};
  CHECK_THROWS_AS(eigenfunction(free, free.domain(), 0, bad, {}), InputError);
}
