#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "disclab/dyadic.hpp"
#include "disclab/errors.hpp"

using namespace disclab;

namespace {

DyadicRational q(const char* s) { return DyadicRational::parse(s); }

std::vector<DyadicRational> pt(std::initializer_list<const char*> xs) {
  std::vector<DyadicRational> out;
  for (auto s : xs) out.push_back(q(s));
  return out;
}

// Exact integral of the product of two Haar functions by summing over the
// cells of the 2^-bits grid.
DyadicRational inner(const DyadicIndex& a, const DyadicIndex& b, int bits) {
  const std::size_t d = a.j.size();
  const std::uint64_t side = std::uint64_t{1} << bits;
  std::uint64_t cells = 1;
  for (std::size_t k = 0; k < d; ++k) cells *= side;
  long sum = 0;
  std::vector<DyadicRational> x(d);
  for (std::uint64_t c = 0; c < cells; ++c) {
    std::uint64_t rest = c;
    for (std::size_t k = d; k-- > 0;) {
      x[k] = DyadicRational(mpz_class(static_cast<unsigned long>(2 * (rest % side) + 1)), static_cast<unsigned>(bits + 1));
      rest /= side;
    }
    sum += haar_eval(a, x) * haar_eval(b, x);
  }
  return DyadicRational(sum) * DyadicRational::pow2(bits * static_cast<int>(d));
}

}  // namespace

TEST_CASE("canonical form and parsing") {
  CHECK(q("2/2^2") == q("1/2^1"));
  CHECK(q("0/2^5").exponent() == 0);
  CHECK(q("6/2^3").to_string() == "3/2^2");
  CHECK(q("-3/2^2").to_double() == -0.75);
  CHECK(q("7") == DyadicRational(7));
  CHECK(q("1/2^3") == DyadicRational::pow2(3));
  CHECK_THROWS_AS(q("1/3"), ParseError);
  CHECK_THROWS_AS(q("abc"), ParseError);
  CHECK(q("1/2^1") < q("3/2^2"));
  CHECK(abs(q("-5/2^4")) == q("5/2^4"));
  CHECK(q("3/2^2").times_pow2(2) == DyadicRational(3));
  CHECK(q("3/2^2").times_pow2(-1) == q("3/2^3"));
}

TEST_CASE("arithmetic is exact") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 500; ++rep) {
    const DyadicRational a(mpz_class(static_cast<long>(rng() % 2000001) - 1000000), static_cast<unsigned>(rng() % 90));
    const DyadicRational b(mpz_class(static_cast<long>(rng() % 2000001) - 1000000), static_cast<unsigned>(rng() % 90));
    CHECK((a + b) - b == a);
    CHECK(a * b == b * a);
    CHECK((a - a).is_zero());
    CHECK((a + b).to_mpq() == a.to_mpq() + b.to_mpq());
    CHECK((a * b).to_mpq() == a.to_mpq() * b.to_mpq());
    CHECK(DyadicRational::parse((a * b).to_string()) == a * b);
  }
}

TEST_CASE("box_of") {
  auto b = box_of(DyadicIndex({-1}, {0}));
  CHECK(b.sides[0].lower == DyadicRational(0));
  CHECK(b.sides[0].upper == DyadicRational(1));
  b = box_of(DyadicIndex({1}, {1}));
  CHECK(b.sides[0].lower == q("1/2^1"));
  CHECK(b.sides[0].upper == DyadicRational(1));
  b = box_of(DyadicIndex({2, 0}, {3, 0}));
  CHECK(b.sides[0].lower == q("3/2^2"));
  CHECK(b.sides[0].upper == DyadicRational(1));
  CHECK(b.sides[1].lower == DyadicRational(0));
  CHECK(b.sides[1].upper == DyadicRational(1));
  CHECK(b.volume() == q("1/2^2"));
  CHECK(b.contains(pt({"3/2^2", "0"})));
  CHECK_FALSE(b.contains(pt({"1/2^1", "0"})));
  CHECK_THROWS_AS(box_of(DyadicIndex({1}, {2})), DomainError);
  CHECK_THROWS_AS(box_of(DyadicIndex({-1}, {1})), DomainError);
  CHECK_THROWS_AS(box_of(DyadicIndex({-2}, {0})), DomainError);
}

TEST_CASE("haar_eval") {
  CHECK(haar_eval(DyadicIndex({-1}, {0}), pt({"3/2^4"})) == 1);
  CHECK(haar_eval(DyadicIndex({0}, {0}), pt({"1/2^2"})) == 1);
  CHECK(haar_eval(DyadicIndex({0}, {0}), pt({"3/2^2"})) == -1);
  CHECK(haar_eval(DyadicIndex({0, 0}, {0, 0}), pt({"1/2^2", "3/2^2"})) == -1);
  CHECK(haar_eval(DyadicIndex({1}, {1}), pt({"1/2^2"})) == 0);
  CHECK(haar_eval(DyadicIndex({1}, {1}), pt({"1/2^1"})) == 1);
  CHECK(haar_eval(DyadicIndex({1}, {1}), pt({"3/2^2"})) == -1);
  CHECK_THROWS_AS(haar_eval(DyadicIndex({0}, {0}), pt({"1"})), DomainError);
}

TEST_CASE("enumerate_shapes") {
  CHECK(enumerate_shapes(2, 1) == std::vector<Shape>{{0, 1}, {1, 0}});
  CHECK(enumerate_shapes(3, 2).size() == 6);
  CHECK(enumerate_shapes(1, 5) == std::vector<Shape>{{5}});
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 7; ++n) {
      const auto shapes = enumerate_shapes(d, n);
      mpz_class c;
      mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(n + d - 1), static_cast<unsigned long>(d - 1));
      CHECK(shapes.size() == c.get_ui());
      for (const auto& j : shapes) CHECK(order(j) == n);
    }
  CHECK(enumerate_level_box(2, 1).size() == 9);
  CHECK(enumerate_level_box(2, 1).front() == Shape{-1, -1});
}

TEST_CASE("Haar functions have norm 2^-|j| and are orthogonal") {
  std::vector<DyadicIndex> family;
  for (const auto& j : enumerate_level_box(2, 1)) {
    std::vector<std::uint64_t> m(2, 0);
    const std::uint64_t a = j[0] < 0 ? 1 : std::uint64_t{1} << j[0];
    const std::uint64_t b = j[1] < 0 ? 1 : std::uint64_t{1} << j[1];
    for (m[0] = 0; m[0] < a; ++m[0])
      for (m[1] = 0; m[1] < b; ++m[1]) family.emplace_back(j, m);
  }
  for (std::size_t x = 0; x < family.size(); ++x)
    for (std::size_t y = 0; y < family.size(); ++y) {
      const DyadicRational ip = inner(family[x], family[y], 3);
      CHECK(ip == (x == y ? DyadicRational::pow2(family[x].order()) : DyadicRational(0)));
    }
  for (int j0 = 0; j0 <= 3; ++j0)
    for (int j1 = 0; j0 + j1 <= 6; ++j1) {
      const DyadicIndex idx({j0, j1}, {(std::uint64_t{1} << j0) - 1, 0});
      CHECK(inner(idx, idx, std::max(j0, j1) + 1) == DyadicRational::pow2(j0 + j1));
    }
}

TEST_CASE("position packing") {
  const Shape j{3, -1, 5};
  const std::vector<std::uint64_t> m{5, 0, 17};
  const auto key = pack_position(j, m);
  CHECK(key == ((5U << 5) | 17U));
  CHECK(unpack_position(j, key) == m);
}
