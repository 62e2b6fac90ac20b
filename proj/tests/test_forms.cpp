#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qspec/criteria.hpp"
#include "qspec/forms.hpp"
#include "qspec/potential_spec.hpp"
#include "test_support.hpp"

using namespace qspec;
using doctest::Approx;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

// Compactly supported inside (lo, hi), so the improper limit is attained.
ComplexGridFunction random_complex_bump(std::mt19937_64& rng, double lo, double hi) {
  auto re = testing::random_bump(rng, lo, hi);
  std::uniform_real_distribution<double> val(-2, 2);
  std::vector<cd> v;
  for (double x : re.values()) v.emplace_back(x, x == 0.0 ? 0.0 : val(rng));
  return ComplexGridFunction(std::vector<double>(re.grid().begin(), re.grid().end()), std::move(v));
}

// a u + b v on the merged grid (exact for piecewise-linear data).
ComplexGridFunction combine(cd a, const ComplexGridFunction& u, cd b, const ComplexGridFunction& v) {
  std::vector<double> g(u.grid().begin(), u.grid().end());
  g.insert(g.end(), v.grid().begin(), v.grid().end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return sample(std::move(g), [&](double x) { return a * u(x) + b * v(x); });
}

double form_of(const BVPotential& p, const ComplexGridFunction& w) {
  const auto M = default_M_grid(p), N = default_N_grid(p);
  return form_bilinear(p, w, w, M, N).value.real();
}

}  // namespace

TEST_CASE("potential_energy: single atom and finitely supported u") {
  const double alpha = 1.3, c = 0.7;
  auto p = make_single_delta(-5, 5, 0.0, -alpha);
  auto u = sample(linspace(-1, 1, 21), [&](double x) { return c * (1 - x * x); });
  const std::vector<double> M{1, 2, 3, 4}, N{1, 2.5, 4, 5};
  const auto r = potential_energy(p, u, M, N);
  for (double v : r.partial) CHECK(v == Approx(-alpha * c * c).epsilon(1e-14));
  CHECK(r.membership == Membership::converged);
  REQUIRE(r.form_value);
  CHECK(*r.form_value == Approx(r.kinetic - alpha * c * c));

  auto zero = sample(linspace(-1, 1, 5), [](double) { return 0.0; });
  const auto z = potential_energy(p, zero, M, N);
  CHECK(z.Q == 0.0);
  CHECK(z.membership == Membership::converged);
}

TEST_CASE("potential_energy: partial table is a genuine double limit") {
  // u = 1 everywhere on [-10, 10] against density |x|: partials grow in both M and N.
  auto p = make_abs_x(-10, 10, 0.01);
  auto one = sample(linspace(-10, 10, 3), [](double) { return 1.0; });
  const std::vector<double> M{4, 6, 8, 10}, N{4, 6, 8, 10};
  const auto r = potential_energy(p, one, M, N);
  CHECK(r.membership == Membership::diverged);
  CHECK_FALSE(r.form_value);
  // Independent in M and N: partial(M, N) = M^2/2 + N^2/2.
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(r.at(i, j) == Approx((M[i] * M[i] + N[j] * N[j]) / 2));

  // Alternating unit atoms: partials flip between 0 and 1.
  std::vector<Atom> atoms;
  for (int n = -9; n <= 9; ++n) atoms.push_back({double(n), n % 2 == 0 ? 1.0 : -1.0});
  BVPotential alt({-10.0, 10.0}, {0.0}, atoms);
  const std::vector<double> M2{6.5, 7.5, 8.5}, N2{6.5, 7.5, 8.5};
  const auto o = potential_energy(alt, one, M2, N2);
  CHECK(o.membership == Membership::oscillating);
}

TEST_CASE("potential_energy: scaling and serial/parallel agreement") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = testing::random_potential(rng, -3, 3);
    auto u = testing::random_bump(rng, -3, 3);
    const auto M = default_M_grid(p), N = default_N_grid(p);
    const double q = potential_energy(p, u, M, N).Q;
    for (double c : {2.0, -0.5, 4.0}) {
      const double qc = potential_energy(p, u.map([&](double x) { return c * x; }), M, N).Q;
      CHECK(qc == c * c * q);
    }
    CHECK(potential_energy(p, u, M, N, Execution::serial).partial ==
          potential_energy(p, u, M, N, Execution::parallel).partial);
  }
}

TEST_CASE("form_bilinear: diagonal, free case and polarization") {
  auto free = BVPotential::zero(0, pi);
  const auto M = default_M_grid(free), N = default_N_grid(free);
  auto s = to_complex(sample(linspace(0, pi, 20001), [](double x) { return std::sqrt(2 / pi) * std::sin(x); }));
  CHECK(form_bilinear(free, s, s, M, N).value.real() == Approx(1.0).epsilon(1e-7));

  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = testing::random_potential(rng, -3, 3);
    const auto Mp = default_M_grid(p), Np = default_N_grid(p);
    auto u = random_complex_bump(rng, -2.5, 2.5), v = random_complex_bump(rng, -2.5, 2.5);
    const auto t = form_bilinear(p, u, v, Mp, Np);
    REQUIRE(t.converged);
    // Conjugate symmetry.
    const auto ts = form_bilinear(p, v, u, Mp, Np).value;
    CHECK(std::abs(t.value - std::conj(ts)) <= 1e-12 * (1 + std::abs(t.value)));
    // Polarization.
    const cd i(0, 1);
    const cd pol = form_of(p, combine(1, u, 1, v)) - form_of(p, combine(1, u, -1, v)) +
                   i * form_of(p, combine(1, u, i, v)) - i * form_of(p, combine(1, u, -i, v));
    const double scale = form_of(p, combine(1, u, 1, v)) + form_of(p, combine(1, u, -1, v));
    CHECK(std::abs(pol - 4.0 * t.value) <= 1e-9 * std::max(1.0, std::abs(scale)));
    // Diagonal matches potential_energy + kinetic.
    auto ur = sample(std::vector<double>(u.grid().begin(), u.grid().end()), [&](double x) { return u(x).real(); });
    const auto fr = potential_energy(p, ur, Mp, Np);
    CHECK(form_of(p, to_complex(ur)) == Approx(*fr.form_value).epsilon(1e-12).scale(1.0));
  }

  // Pure kinetic when P = 0.
  auto z = BVPotential::zero(-3, 3);
  auto u = random_complex_bump(rng, -2.5, 2.5), v = random_complex_bump(rng, -2.5, 2.5);
  const auto tz = form_bilinear(z, u, v, default_M_grid(z), default_N_grid(z)).value;
  const auto kin = derivative_inner_product(u, v, -3, 3);
  CHECK(std::abs(tz - kin) <= 1e-14 * (1 + std::abs(kin)));
}

TEST_CASE("form lower bound on random compactly supported u") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = testing::random_potential(rng, -4, 4, 6, 10, 4.0, 4.0);
    auto u = testing::random_bump(rng, -4, 4);
    const double C = brinck_constant(p, 1.0, Execution::serial).C;
    const double Q = stieltjes_abs_sq(p, u, Interval(u.front(), u.back()));
    const double t = derivative_norm_sq(u) + Q;
    CHECK(t >= -2 * C * C * l2_norm_sq(u) - 1e-9);
  }
}

TEST_CASE("form_lower_bound_check") {
  auto zero = BVPotential::zero(-2, 2);
  auto u = sample(linspace(-1, 1, 41), [](double x) { return 1 - x * x; });
  const auto m0 = form_lower_bound_check(zero, u, 0.5);
  CHECK(m0.C == 2.0);
  CHECK(m0.margin_s == Approx(8 * l2_norm_sq(u) + derivative_norm_sq(u)));

  auto well = make_single_delta(-2, 2, 0.0, -2.0);
  auto peak = sample(linspace(-0.3, 0.3, 3), [](double x) { return x == 0.0 ? 1.0 : 0.0; });
  for (double h : {0.1, 0.25, 0.5, 1.0}) {
    const auto m = form_lower_bound_check(well, peak, h);
    CHECK(m.margin_s >= -1e-10);
    CHECK(m.margin_q >= -1e-10);
  }

  std::mt19937_64 rng(46);
  std::uniform_real_distribution<double> hd(0.01, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = testing::random_potential(rng, -4, 4, 6, 10, 4.0, 4.0);
    auto b = testing::random_bump(rng, -4, 4);
    const auto m = form_lower_bound_check(p, b, hd(rng));
    const double scale = 1 + std::abs(m.margin_s - m.margin_q) + l2_norm_sq(b) + derivative_norm_sq(b);
    CHECK(m.margin_s >= -1e-10 * scale);
    CHECK(m.margin_q >= -1e-10 * scale);
  }

  CHECK_THROWS_AS(form_lower_bound_check(zero, u, 0.0), InputError);
  CHECK_THROWS_AS(form_lower_bound_check(zero, sample(linspace(-1, 1, 3), [](double) { return 1.0; }), 0.5),
                  InputError);
}

TEST_CASE("rayleigh_check: closed-form eigenpairs") {
  auto free = BVPotential::zero(0, pi);
  CHECK(rayleigh_check(free, free.domain(), 0, {}).residual < 1e-8);
  auto well = make_single_delta(-20, 20, 0.0, -1.0);
  const auto r = rayleigh_check(well, well.domain(), 0, {});
  CHECK(r.residual < 1e-6);
  CHECK(r.lambda == Approx(-0.25).epsilon(1e-6));
  CHECK(r.Q == Approx(r.lambda * r.norm_sq - r.kinetic).epsilon(1e-6));
  auto absx = make_abs_x(-20, 20, 1e-3);
  for (int k = 0; k < 5; ++k) CHECK(rayleigh_check(absx, absx.domain(), k, {}).residual < 1e-6);
}

TEST_CASE("forms: error paths") {
  auto p = BVPotential::zero(0, 1);
  auto u = sample(linspace(0, 1, 3), [](double) { return 0.0; });
  const std::vector<double> two{0.5, 1.0}, dec{1.0, 0.5, 0.2}, ok{0.0, 0.5, 1.0};
  CHECK_THROWS_AS(potential_energy(p, u, two, ok), InputError);
  CHECK_THROWS_AS(potential_energy(p, u, ok, dec), InputError);
}
