#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "disclab/discrepancy.hpp"
#include "disclab/errors.hpp"
#include "disclab/gf2net.hpp"
#include "disclab/haar.hpp"
#include "disclab/norms.hpp"
#include "disclab/verify.hpp"
#include "oracles.hpp"

using namespace disclab;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// Energy of all shapes j >= 0 with |j| < n, coefficient by coefficient.
mpq_class low_order_energy(const PointSet& ps, int n) {
  mpq_class e = 0;
  const int bits = std::max(ps.precision_bits(), n) + 1;
  for (int o = 0; o < n; ++o)
    for (const auto& j : enumerate_shapes(ps.dimension(), o)) {
      std::vector<std::uint64_t> m(j.size(), 0);
      for (;;) {
        const mpq_class c = oracle::coefficient_by_grid(ps, DyadicIndex(j, m), bits);
        e += c * c * DyadicRational::pow2(-o).to_mpq();
        std::size_t k = 0;
        while (k < m.size() && ++m[k] == (std::uint64_t{1} << j[k])) m[k++] = 0;
        if (k == m.size()) break;
      }
    }
  return e;
}

}  // namespace

TEST_CASE("empty box scale") {
  CHECK(empty_box_scale(1) == 1);
  CHECK(empty_box_scale(2) == 2);
  CHECK(empty_box_scale(3) == 3);
  CHECK(empty_box_scale(4) == 3);
  CHECK(empty_box_scale(5) == 4);
  CHECK(empty_box_scale(8) == 4);
  for (std::size_t n = 1; n < 3000; n += 7) {
    const int s = empty_box_scale(n);
    CHECK(2 * n <= (std::size_t{1} << s));
    CHECK((std::size_t{1} << s) < 4 * n);
  }
}

TEST_CASE("empty boxes agree with a full scan") {
  std::mt19937_64 rng(2);
  std::vector<PointSet> corpus;
  for (int d = 2; d <= 3; ++d)
    for (int n = 2; n <= 6; ++n) corpus.push_back(digital_points(builtin_net("sobol", d, n, 1)));
  for (int rep = 0; rep < 10; ++rep) corpus.push_back(oracle::random_points(2 + rep % 2, 8, 1 + rng() % 40, rng()));
  for (const auto& ps : corpus) {
    const auto r = check_empty_boxes(ps);
    const auto scan = oracle::empty_boxes_by_scan(ps, r.n);
    REQUIRE(scan.size() == r.shapes.size());
    bool pass = true;
    for (std::size_t s = 0; s < scan.size(); ++s) {
      CHECK(r.shapes[s].empty == scan[s]);
      CHECK(r.shapes[s].total == (std::uint64_t{1} << r.n));
      pass = pass && scan[s] >= (std::uint64_t{1} << (r.n - 1));
    }
    // with at most 2^{n-1} points, half of every shape's boxes are empty
    CHECK(pass);
    CHECK(r.pass);
  }
}

TEST_CASE("the empty-box bound sits below the cube energy") {
  for (int d = 2; d <= 3; ++d)
    for (int n = 3; n <= 7; ++n) {
      const PointSet ps = digital_points(builtin_net("hammersley", d, n - 1, 2));
      const auto low = bmo_lower_bound(ps);
      CHECK(low.params["n"] == n);
      const double cube = static_cast<double>(bmo_cube_energy(HaarCoefficientTable(ps)));
      CHECK(low.value * low.value <= cube * (1 + 1e-12));
      CHECK(low.value > 0);
    }
}

TEST_CASE("regime sums") {
  std::vector<std::pair<PointSet, int>> corpus;
  for (int d = 2; d <= 3; ++d)
    for (int n = 2; n <= 4; ++n) corpus.emplace_back(digital_points(builtin_net("sobol", d, n, 2)), n);
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 6; ++rep) corpus.emplace_back(oracle::random_points(2, 4, 1 + rng() % 12, rng()), 3);
  for (const auto& [ps, n] : corpus)
    for (int t = 0; t <= n; ++t) {
      const HaarCoefficientTable table(ps, {std::max(n, ps.precision_bits()), 1e9});
      const auto r = three_regime_sums(table, n, t);
      const double parts = r.large + r.intermediate + r.small_linear + r.small_counting + r.small_cross;
      CHECK(rel(parts, r.total) <= 1e-12);
      CHECK(rel(r.total, static_cast<double>(bmo_cube_energy(table))) <= 1e-12);
      if (ps.dimension() == 2 && ps.precision_bits() <= 6)
        CHECK(rel(r.large + r.intermediate, low_order_energy(ps, n).get_d()) <= 1e-12);
      if (t == 0) CHECK(r.intermediate == 0.0);
      CHECK(r.large >= 0);
      CHECK(r.small_linear >= 0);
    }
  const auto synthetic = HaarCoefficientTable::from_entries(2, {{DyadicIndex({0, 0}, {0, 0}), DyadicRational(1)}});
  CHECK_THROWS_AS(three_regime_sums(synthetic, 2, 0), DomainError);
  const PointSet ps = digital_points(builtin_net("sobol", 2, 4, 1));
  CHECK_THROWS_AS(three_regime_sums(HaarCoefficientTable(ps, {1, 1e9}), 4, 0), DomainError);
}

TEST_CASE("fitted coefficient constants are tight") {
  for (int d = 2; d <= 3; ++d)
    for (int n = 2; n <= 5; ++n) {
      const auto spec = builtin_net("sobol", d, n, 2);
      const int t = minimal_t(spec, 2);
      const PointSet ps = digital_points(spec);
      const HaarCoefficientTable table(ps, {std::max(n, ps.precision_bits()), 1e9});
      const auto fit = fit_coefficient_bounds(table, n, t);
      CHECK(coefficient_bound_violations(table, n, t, fit) == 0);
      CHECK(fit.max_exceptions <= (std::uint64_t{1} << n));
      auto shrunk = fit;
      shrunk.c1 *= 0.99;
      if (fit.c1 > 0) CHECK(coefficient_bound_violations(table, n, t, shrunk) > 0);
      shrunk = fit;
      shrunk.c3 *= 0.99;
      if (fit.c3 > 0) CHECK(coefficient_bound_violations(table, n, t, shrunk) > 0);
    }
}

TEST_CASE("power law fit") {
  std::vector<std::pair<double, double>> pts;
  for (int n = 3; n <= 10; ++n) pts.emplace_back(n, 2.5 * std::pow(n, 1.5));
  const auto f = fit_power_law(pts);
  CHECK(std::fabs(f.exponent - 1.5) <= 1e-12);
  CHECK(std::fabs(f.intercept - std::log(2.5)) <= 1e-12);
  CHECK(f.residual <= 1e-12);
  pts.back().second *= 1.1;
  CHECK(fit_power_law(pts).residual > 0);
  CHECK_THROWS_AS(fit_power_law({{1, 1}}), DomainError);
  CHECK_THROWS_AS(fit_power_law({{1, 1}, {2, 0}}), DomainError);
  CHECK_THROWS_AS(fit_power_law({{2, 1}, {2, 3}}), DomainError);
}

TEST_CASE("study norm names") {
  for (auto s : {StudyNorm::BmoProxy, StudyNorm::OrliczProxy, StudyNorm::Star, StudyNorm::L2, StudyNorm::BmoLower})
    CHECK(parse_study_norm(to_string(s)) == s);
  CHECK(parse_study_norm("bmo") == StudyNorm::BmoProxy);
  CHECK_THROWS_AS(parse_study_norm("linf"), DomainError);
}

TEST_CASE("scaling study") {
  const auto s = scaling_study("hammersley", 2, 1, {3, 4, 5, 6}, StudyNorm::L2);
  REQUIRE(s.rows.size() == 4);
  for (const auto& row : s.rows) {
    CHECK(row.points == (std::size_t{1} << row.n));
    const double w = l2_warnock(digital_points(builtin_net("hammersley", 2, row.n, 1))).value;
    CHECK(rel(row.value, w) <= 1e-12);
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : s.rows) pts.emplace_back(row.n, row.value);
  CHECK(fit_power_law(pts).exponent == s.exponent);
  const auto low = scaling_study("sobol", 2, 1, {3, 4, 5, 6}, StudyNorm::BmoLower);
  for (const auto& row : low.rows) CHECK(row.points == (std::size_t{1} << (row.n - 1)));
}

TEST_CASE("discretization") {
  for (int d = 2; d <= 3; ++d) {
    const PointSet ps = digital_points(builtin_net("hammersley", d, 6, 1));
    const auto r = discretization_consistency(ps, 500, 4);
    CHECK(r.applicable);
    CHECK(r.counting_constant);
    CHECK(r.pass);
    CHECK(r.max_variation <= r.bound);
    CHECK(r.bound == 64.0 * d / 64.0);
    CHECK(r.cells == 500);
  }
  const auto odd = discretization_consistency(oracle::random_points(2, 8, 5, 1));
  CHECK_FALSE(odd.applicable);
  CHECK_FALSE(odd.reason.empty());
}
