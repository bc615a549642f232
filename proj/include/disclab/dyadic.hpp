#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace disclab {

using Int128 = __int128;

mpz_class to_mpz(Int128 v);
/// num/den in canonical form.
mpq_class make_q(const mpz_class& num, const mpz_class& den);

/// Exact number numerator / 2^exponent.
///
/// Always kept canonical: the numerator is odd, or zero with exponent 0.
/// Equality is therefore structural.
class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(long v) : num_(v) {}  // NOLINT(google-explicit-constructor)
  DyadicRational(mpz_class numerator, unsigned exponent);

  static DyadicRational from_int128(Int128 numerator, unsigned exponent);
  /// 2^-k.
  static DyadicRational pow2(int k);
  /// Parses "a/2^k" (also accepts a bare integer).
  static DyadicRational parse(std::string_view text);

  const mpz_class& numerator() const noexcept { return num_; }
  unsigned exponent() const noexcept { return exp_; }
  bool is_zero() const noexcept { return sgn(num_) == 0; }
  int sign() const noexcept { return sgn(num_); }

  /// Numerator after rescaling to denominator 2^k; requires k >= exponent().
  mpz_class scaled_numerator(unsigned k) const;

  double to_double() const;
  long double to_long_double() const;
  mpq_class to_mpq() const;
  std::string to_string() const;

  DyadicRational operator-() const;
  DyadicRational& operator+=(const DyadicRational& o);
  DyadicRational& operator-=(const DyadicRational& o);
  DyadicRational& operator*=(const DyadicRational& o);
  /// Multiplies by 2^k (k may be negative).
  DyadicRational times_pow2(int k) const;

  friend DyadicRational operator+(DyadicRational a, const DyadicRational& b) { return a += b; }
  friend DyadicRational operator-(DyadicRational a, const DyadicRational& b) { return a -= b; }
  friend DyadicRational operator*(DyadicRational a, const DyadicRational& b) { return a *= b; }

  friend bool operator==(const DyadicRational& a, const DyadicRational& b) {
    return a.exp_ == b.exp_ && a.num_ == b.num_;
  }
  friend std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b);

 private:
  void normalize();

  mpz_class num_{0};
  unsigned exp_ = 0;
};

DyadicRational abs(const DyadicRational& v);

/// Dyadic level vector j; entries in {-1, 0, 1, ...}.
using Shape = std::vector<int>;

/// |j| = sum of max(j_k, 0).
int order(std::span<const int> shape);

/// Identifies the box I_{j,m} and the Haar function h_{j,m}.
struct DyadicIndex {
  Shape j;
  std::vector<std::uint64_t> m;

  DyadicIndex() = default;
  DyadicIndex(Shape shape, std::vector<std::uint64_t> position);

  std::size_t dimension() const noexcept { return j.size(); }
  int order() const { return disclab::order(j); }
  bool valid() const;

  friend bool operator==(const DyadicIndex&, const DyadicIndex&) = default;
  friend auto operator<=>(const DyadicIndex&, const DyadicIndex&) = default;
};

struct DyadicInterval {
  DyadicRational lower;
  DyadicRational upper;
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

/// Product of half-open intervals [lower_k, upper_k).
struct DyadicBox {
  std::vector<DyadicInterval> sides;

  DyadicRational volume() const;
  bool contains(std::span<const DyadicRational> x) const;
  friend bool operator==(const DyadicBox&, const DyadicBox&) = default;
};

DyadicBox box_of(const DyadicIndex& index);

/// Value of the L-infinity normalized Haar function h_{j,m} at x in [0,1)^d.
int haar_eval(const DyadicIndex& index, std::span<const DyadicRational> x);

/// All j in N_0^d with |j| = n, in lexicographic order.
std::vector<Shape> enumerate_shapes(int d, int n);

/// All j in {-1, ..., max_level}^d, in lexicographic order.
std::vector<Shape> enumerate_level_box(int d, int max_level);

/// Packs m into one word using max(j_k, 0) bits per coordinate (first
/// coordinate in the most significant position). Requires |j| <= 64.
std::uint64_t pack_position(std::span<const int> shape, std::span<const std::uint64_t> m);
std::vector<std::uint64_t> unpack_position(std::span<const int> shape, std::uint64_t key);

}  // namespace disclab
