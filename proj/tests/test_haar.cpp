#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "disclab/discrepancy.hpp"
#include "disclab/errors.hpp"
#include "disclab/gf2net.hpp"
#include "disclab/haar.hpp"
#include "oracles.hpp"

using namespace disclab;

namespace {

DyadicRational q(const char* s) { return DyadicRational::parse(s); }

std::vector<DyadicIndex> all_indices(const std::vector<Shape>& shapes) {
  std::vector<DyadicIndex> out;
  for (const auto& j : shapes) {
    const int ord = order(j);
    for (std::uint64_t key = 0; key < (std::uint64_t{1} << ord); ++key) out.emplace_back(j, unpack_position(j, key));
  }
  return out;
}

DyadicIndex random_index(int d, int max_j, std::mt19937_64& rng) {
  Shape j(static_cast<std::size_t>(d));
  std::vector<std::uint64_t> m(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    j[static_cast<std::size_t>(k)] = static_cast<int>(rng() % static_cast<std::uint64_t>(max_j + 2)) - 1;
    const int jk = j[static_cast<std::size_t>(k)];
    m[static_cast<std::size_t>(k)] = jk < 0 ? 0 : rng() % (std::uint64_t{1} << jk);
  }
  return {j, m};
}

bool inside(const DyadicIndex& small, const DyadicIndex& big) {
  for (std::size_t k = 0; k < small.j.size(); ++k) {
    if (big.j[k] > small.j[k]) return false;
    if ((small.m[k] >> (small.j[k] - big.j[k])) != big.m[k]) return false;
  }
  return true;
}

// Containment in a union of boxes, checked cell by cell on a fine grid.
bool covered_by_cells(const DyadicIndex& box, const std::vector<DyadicIndex>& region, int level) {
  const std::size_t d = box.j.size();
  std::vector<std::uint64_t> lo(d), hi(d), c(d);
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] = box.m[k] << (level - box.j[k]);
    hi[k] = (box.m[k] + 1) << (level - box.j[k]);
    c[k] = lo[k];
  }
  for (;;) {
    bool hit = false;
    for (const auto& r : region) {
      bool in = true;
      for (std::size_t k = 0; k < d && in; ++k) in = r.j[k] < 0 || (c[k] >> (level - r.j[k])) == r.m[k];
      if (in) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++c[k] < hi[k]) break;
      c[k] = lo[k];
      if (k == 0) return true;
    }
  }
}

}  // namespace

TEST_CASE("coeff_linear examples") {
  CHECK(coeff_linear(Shape{0}, 1) == q("-1/2^2"));
  CHECK(coeff_linear(Shape{-1}, 1) == q("1/2^1"));
  CHECK(coeff_linear(Shape{0, 0}, 4) == q("1/2^2"));
  CHECK(coeff_linear(Shape{2, -1}, 3) == q("-3/2^7"));
}

TEST_CASE("coeff_point examples") {
  for (int j = 0; j < 5; ++j) CHECK(coeff_point(DyadicIndex({j}, {0}), std::vector<DyadicRational>{0}).is_zero());
  CHECK(coeff_point(DyadicIndex({0}, {0}), std::vector<DyadicRational>{q("1/2^2")}) == q("-1/2^2"));
  CHECK(coeff_point(DyadicIndex({0}, {0}), std::vector<DyadicRational>{q("1/2^1")}) == q("-1/2^1"));
  CHECK(coeff_point(DyadicIndex({-1}, {0}), std::vector<DyadicRational>{q("1/2^2")}) == q("3/2^2"));
  CHECK(coeff_point(DyadicIndex({1}, {0}), std::vector<DyadicRational>{q("3/2^2")}).is_zero());
}

TEST_CASE("coeff_discrepancy examples") {
  const PointSet origin = PointSet::from_dyadic(1, 0, {{DyadicRational(0)}});
  CHECK(coeff_discrepancy(origin, DyadicIndex({0}, {0})) == q("1/2^2"));
  // mean of D over the cube
  const PointSet ham = digital_points(builtin_net("hammersley", 2, 2, 1));
  const DyadicRational mean = coeff_discrepancy(ham, DyadicIndex({-1, -1}, {0, 0}));
  CHECK(mean.to_mpq() == oracle::coefficient_by_grid(ham, DyadicIndex({-1, -1}, {0, 0}), 2));
  for (const auto& idx : all_indices({Shape{1, 1}}))
    CHECK(coeff_discrepancy(ham, idx).to_mpq() == oracle::coefficient_by_grid(ham, idx, 8));
}

TEST_CASE("closed forms agree with quadrature") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const DyadicIndex idx = random_index(d, 10, rng);
    const std::size_t n = 1 + rng() % 100;
    std::vector<double> zd;
    std::vector<DyadicRational> z;
    for (int k = 0; k < d; ++k) {
      z.emplace_back(mpz_class(static_cast<unsigned long>(rng() % 4096)), 12u);
      zd.push_back(z.back().to_double());
    }
    CHECK(std::fabs(coeff_linear(idx, n).to_double() - oracle::midpoint_linear(idx, n, 12)) <= 1e-6);
    CHECK(std::fabs(coeff_point(idx, z).to_double() - oracle::midpoint_point(idx, zd, 12)) <= 1e-6);
  }
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const DyadicIndex idx = random_index(d, 5, rng);
    const std::size_t n = 1 + rng() % 50;
    std::vector<DyadicRational> z;
    for (int k = 0; k < d; ++k) z.emplace_back(mpz_class(static_cast<unsigned long>(rng() % 64)), 6u);
    CHECK(coeff_linear(idx, n) == oracle::exact_grid_linear(idx, n, 6));
    CHECK(coeff_point(idx, z) == oracle::exact_grid_point(idx, z, 6));
  }
}

TEST_CASE("coefficient table") {
  const PointSet origin = PointSet::from_dyadic(1, 0, {{DyadicRational(0)}});
  const HaarCoefficientTable t1(origin, {1, 1e9});
  CHECK(t1.blocks().size() == 3);
  for (const auto& idx : all_indices(enumerate_level_box(1, 1))) {
    CHECK(t1.covers(idx.j));
    if (idx.j[0] >= 0) CHECK(t1.counting(idx).is_zero());
  }

  const PointSet ham = digital_points(builtin_net("hammersley", 2, 3, 1));
  const HaarCoefficientTable t2(ham, {2, 1e9});
  CHECK(t2.blocks().size() == 16);
  CHECK(t2.logical_size() == 64.0);

  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 12; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int p = 2 + static_cast<int>(rng() % 3);
    const PointSet ps = oracle::random_points(d, p, 1 + rng() % 12, rng());
    const HaarCoefficientTable table(ps);
    CHECK(table.max_level() == p);
    for (const auto& idx : all_indices(enumerate_level_box(d, p))) {
      CHECK(table.coefficient(idx).to_mpq() == oracle::coefficient_by_grid(ps, idx, p + 1));
      CHECK(table.coefficient(idx) == coeff_discrepancy(ps, idx));
      bool fine = false;
      for (int j : idx.j) fine = fine || j >= p;
      if (fine) CHECK(table.counting(idx).is_zero());
    }
    const HaarCoefficientTable again(ps);
    std::ostringstream a, b;
    table.write_csv(a, true);
    again.write_csv(b, true);
    CHECK(a.str() == b.str());
  }
  CHECK_THROWS_AS(HaarCoefficientTable(oracle::random_points(3, 20, 100, 1), {std::nullopt, 1e4}), ResourceError);
}

TEST_CASE("csv dump") {
  const PointSet ham = digital_points(builtin_net("hammersley", 2, 2, 1));
  const HaarCoefficientTable table(ham, {1, 1e9});
  std::ostringstream os;
  table.write_csv(os, true);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "j_1,j_2,m_1,m_2,counting_num,counting_exp,linear_num,linear_exp");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 16);
}

TEST_CASE("square function") {
  const DyadicIndex idx({1, 0}, {1, 0});
  const auto t = HaarCoefficientTable::from_entries(2, {{idx, DyadicRational::pow2(1)}});
  const std::vector<Shape> shapes{{1, 0}};
  CHECK(square_function(t, shapes, std::vector<DyadicRational>{q("3/2^2"), q("1/2^3")}) == 1.0);
  CHECK(square_function(t, shapes, std::vector<DyadicRational>{q("1/2^2"), q("1/2^3")}) == 0.0);
  CHECK(square_function(t, {}, std::vector<DyadicRational>{q("3/2^2"), q("1/2^3")}) == 0.0);

  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int p = 2 + static_cast<int>(rng() % 2);
    const PointSet ps = oracle::random_points(d, p, 1 + rng() % 10, rng());
    const HaarCoefficientTable table(ps);
    std::vector<Shape> chosen;
    for (const auto& j : enumerate_level_box(d, p))
      if (rng() % 2) chosen.push_back(j);
    const int level = p + 1;
    const auto expect = oracle::square_function_by_sum(ps, chosen, level);
    const std::uint64_t side = std::uint64_t{1} << level;
    for (std::size_t cell = 0; cell < expect.size(); ++cell) {
      std::vector<DyadicRational> x(static_cast<std::size_t>(d));
      std::uint64_t rest = cell;
      for (int k = d - 1; k >= 0; --k) {
        x[static_cast<std::size_t>(k)] = DyadicRational(mpz_class(static_cast<unsigned long>(rest % side)), static_cast<unsigned>(level));
        rest /= side;
      }
      CHECK(std::fabs(square_function(table, chosen, x) - expect[cell]) <= 1e-12 * (1 + expect[cell]));
    }
  }
}

TEST_CASE("Parseval") {
  const DyadicIndex idx({2, 1}, {3, 0});
  const auto single = HaarCoefficientTable::from_entries(2, {{idx, DyadicRational::pow2(3)}});
  CHECK(parseval_l2_squared(single) == DyadicRational::pow2(3).to_mpq());

  const PointSet origin = PointSet::from_dyadic(1, 0, {{DyadicRational(0)}});
  CHECK(parseval_l2_squared(HaarCoefficientTable(origin)) == mpq_class(1, 3));
  CHECK(std::fabs(parseval_l2(HaarCoefficientTable(origin)).value - std::sqrt(1.0 / 3)) <= 1e-12);

  for (int d = 2; d <= 3; ++d)
    for (int n = 1; n <= 5; ++n) {
      const PointSet ps = digital_points(builtin_net("hammersley", d, n, 1 + (n % 2)));
      CHECK(parseval_l2_squared(HaarCoefficientTable(ps)) == l2_squared_warnock(ps));
      // J = P - 1 suffices
      CHECK(parseval_l2_squared(HaarCoefficientTable(ps, {ps.precision_bits() - 1, 1e9})) == l2_squared_warnock(ps));
    }
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const PointSet ps = oracle::random_points(d, 1 + static_cast<int>(rng() % 5), 1 + rng() % 20, rng());
    CHECK(parseval_l2_squared(HaarCoefficientTable(ps)) == l2_squared_warnock(ps));
  }
  const PointSet ps = digital_points(builtin_net("hammersley", 2, 4, 1));
  CHECK_THROWS_AS(parseval_l2(HaarCoefficientTable(ps, {2, 1e9})), DomainError);
}

TEST_CASE("maximal interval mass") {
  const PointSet ham = digital_points(builtin_net("hammersley", 2, 3, 1));
  const HaarCoefficientTable table(ham);
  // a box holding no point: every counting coefficient inside vanishes
  std::vector<DyadicIndex> empty_region;
  for (const auto& j : enumerate_shapes(2, 4))
    for (const auto& idx : all_indices({j}))
      if (box_point_counts(ham, j).count(idx.m) == 0) {
        empty_region.push_back(idx);
        break;
      }
  REQUIRE(!empty_region.empty());
  CHECK(maximal_interval_mass(table, {empty_region.front()}, 0).is_zero());

  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 25; ++rep) {
    const int d = 2;
    const PointSet ps = rep == 0 ? ham : oracle::random_points(d, 3, 1 + rng() % 10, rng());
    const HaarCoefficientTable t(ps);
    const int n = static_cast<int>(rng() % 4);
    std::vector<DyadicIndex> region;
    if (rep == 0) {
      region.emplace_back(Shape{1, 1}, std::vector<std::uint64_t>{0, 0});
      region.emplace_back(Shape{1, 1}, std::vector<std::uint64_t>{1, 0});
      region.emplace_back(Shape{1, 1}, std::vector<std::uint64_t>{0, 1});
      region.emplace_back(Shape{1, 1}, std::vector<std::uint64_t>{1, 1});
    } else {
      const int boxes = 1 + static_cast<int>(rng() % 4);
      for (int b = 0; b < boxes; ++b) region.push_back(random_index(d, 2, rng));
      for (auto& r : region)
        for (std::size_t k = 0; k < r.j.size(); ++k)
          if (r.j[k] < 0) r.j[k] = 0;
    }
    // oracle: qualifying boxes, then the maximal ones among them
    const int level = t.max_level();
    std::vector<DyadicIndex> qualifying;
    for (const auto& j : enumerate_level_box(d, level)) {
      if (*std::min_element(j.begin(), j.end()) < 0 || order(j) < n) continue;
      for (const auto& idx : all_indices({j}))
        if (!t.counting(idx).is_zero() && covered_by_cells(idx, region, level)) qualifying.push_back(idx);
    }
    DyadicRational expect(0);
    for (const auto& a : qualifying) {
      bool maximal = true;
      for (const auto& b : qualifying)
        if (!(a == b) && inside(a, b)) maximal = false;
      if (maximal) expect += DyadicRational::pow2(a.order());
    }
    CHECK(maximal_interval_mass(t, region, n) == expect);
  }
}
