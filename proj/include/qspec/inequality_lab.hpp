#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qspec/execution.hpp"
#include "qspec/grid_function.hpp"
#include "qspec/measure.hpp"

namespace qspec {

/// A signed slack: the inequality holds iff value >= 0. `scale` is the
/// magnitude of the dominant term, used to judge rounding.
struct Margin {
  double value;
  double scale;
  double normalized() const { return scale > 0.0 ? value / scale : value; }
};

/// (inf_J f + var_J f) sup_K \int_K dg - \int_J f dg over the compact interval
/// J = [a, b]; the sup runs over compact K inside J, including single points.
Margin check_ganelius(const GridFunction& f, const BVPotential& g, const Interval& J);

struct EmbeddingMargins {
  Margin lower;  // |f(x)|^2 >= l^-1 ||f||^2 / 2 - l ||f'||^2 / 2 at every x in J
  Margin upper;  // |f(x)|^2 <= 2 t^-1 ||f||^2 + t ||f'||^2
  Margin inf;    // inf_J |f|^2 <= l^-1 ||f||^2
  Margin worst() const;
};
EmbeddingMargins check_embedding(const GridFunction& f, const Interval& J, double t);

// \int_I |f|^2 dq + C (2 (hl/n)^-1 ||f||^2 + (hl/n) ||f'||^2), n = ceil(l).
Margin check_lemma3(const BVPotential& p, const GridFunction& f, const Interval& I, double h);

// \int_I |u'|^2 + 2 C^2 \int_I |u|^2 + \int_I |u|^2 dq for |I| <= 1.
Margin check_corollary1(const BVPotential& p, const GridFunction& u, const Interval& I);

// C1 (2 (hl/n)^-1 ||u||^2 + (hl/n) ||u'||^2) - \int_I |u|^2 dq with C1 the
// Brinck constant of -dq.
Margin check_proposition_upper(const BVPotential& p, const GridFunction& u, const Interval& I,
                               double h);

/// Rejection sampler for potentials satisfying the Brinck condition with a
/// constant at most c_target: atom weights and densities are drawn from
/// [-c_target, 5] and the draw is kept only if brinck_constant agrees.
BVPotential random_br_potential(std::mt19937_64& rng, double lo, double hi, double c_target);

struct Violation {
  std::size_t case_index;
  std::uint64_t case_seed;
  std::uint64_t inputs_digest;
  double margin;  // normalized
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed;
  std::size_t n_cases;
  double tolerance;
  double worst_margin;  // normalized
  std::vector<Violation> violations;
  std::uint64_t digest;  // over every case's inputs and margin
};

std::vector<std::string_view> suite_names();

// Deterministic in (name, seed, n_cases) regardless of the execution policy.
SuiteReport run_suite(std::string_view name, std::uint64_t seed, std::size_t n_cases,
                      Execution ex = Execution::parallel);

}  // namespace qspec
