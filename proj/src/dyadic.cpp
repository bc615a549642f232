#include "disclab/dyadic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "disclab/errors.hpp"

namespace disclab {

mpz_class to_mpz(Int128 v) {
  const bool negative = v < 0;
  unsigned __int128 mag = negative ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::uint64_t words[2] = {static_cast<std::uint64_t>(mag), static_cast<std::uint64_t>(mag >> 64)};
  mpz_class out;
  mpz_import(out.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
  if (negative) out = -out;
  return out;
}

DyadicRational::DyadicRational(mpz_class numerator, unsigned exponent)
    : num_(std::move(numerator)), exp_(exponent) {
  normalize();
}

DyadicRational DyadicRational::from_int128(Int128 numerator, unsigned exponent) {
  if (numerator == 0) return {};
  while (exponent > 0 && (numerator & 1) == 0) {
    numerator >>= 1;
    --exponent;
  }
  DyadicRational out;
  out.num_ = to_mpz(numerator);
  out.exp_ = exponent;
  return out;
}

DyadicRational DyadicRational::pow2(int k) {
  DyadicRational out;
  if (k >= 0) {
    out.num_ = 1;
    out.exp_ = static_cast<unsigned>(k);
  } else {
    out.num_ = 1;
    mpz_mul_2exp(out.num_.get_mpz_t(), out.num_.get_mpz_t(), static_cast<unsigned>(-k));
  }
  return out;
}

DyadicRational DyadicRational::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  std::string_view num_text = text;
  unsigned exponent = 0;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    num_text = trim(text.substr(0, slash));
    auto den = trim(text.substr(slash + 1));
    if (den.size() < 3 || den.substr(0, 2) != "2^")
      throw ParseError("expected denominator of the form 2^k in '" + std::string(text) + "'", 0);
    den.remove_prefix(2);
    auto [ptr, ec] = std::from_chars(den.data(), den.data() + den.size(), exponent);
    if (ec != std::errc{} || ptr != den.data() + den.size())
      throw ParseError("bad exponent in '" + std::string(text) + "'", 0);
  }
  if (num_text.empty()) throw ParseError("empty number", 0);
  mpz_class num;
  if (num.set_str(std::string(num_text), 10) != 0)
    throw ParseError("bad numerator in '" + std::string(text) + "'", 0);
  return DyadicRational(std::move(num), exponent);
}

void DyadicRational::normalize() {
  if (sgn(num_) == 0) {
    exp_ = 0;
    return;
  }
  const auto tz = mpz_scan1(num_.get_mpz_t(), 0);
  const auto shift = std::min<unsigned long>(tz, exp_);
  if (shift > 0) {
    mpz_fdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(), shift);
    exp_ -= static_cast<unsigned>(shift);
  }
}

mpz_class DyadicRational::scaled_numerator(unsigned k) const {
  if (k < exp_) throw DomainError("scaled_numerator: target exponent below value exponent");
  mpz_class out;
  mpz_mul_2exp(out.get_mpz_t(), num_.get_mpz_t(), k - exp_);
  return out;
}

double DyadicRational::to_double() const {
  long e = 0;
  const double mant = mpz_get_d_2exp(&e, num_.get_mpz_t());
  return std::ldexp(mant, static_cast<int>(e - static_cast<long>(exp_)));
}

long double DyadicRational::to_long_double() const {
  if (is_zero()) return 0.0L;
  mpz_class mag = num_;
  mpz_abs(mag.get_mpz_t(), mag.get_mpz_t());
  const auto bits = static_cast<long>(mpz_sizeinbase(mag.get_mpz_t(), 2));
  const long drop = std::max(0L, bits - 64);
  if (drop > 0) mpz_tdiv_q_2exp(mag.get_mpz_t(), mag.get_mpz_t(), static_cast<unsigned long>(drop));
  static_assert(sizeof(mp_limb_t) == 8);
  const auto top = static_cast<long double>(mpz_getlimbn(mag.get_mpz_t(), 0));
  const long double v = std::ldexp(top, static_cast<int>(drop - static_cast<long>(exp_)));
  return sign() < 0 ? -v : v;
}

mpq_class DyadicRational::to_mpq() const {
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, exp_);
  mpq_class out(num_, den);
  out.canonicalize();
  return out;
}

std::string DyadicRational::to_string() const {
  return num_.get_str() + "/2^" + std::to_string(exp_);
}

DyadicRational DyadicRational::operator-() const {
  DyadicRational out = *this;
  out.num_ = -out.num_;
  return out;
}

DyadicRational& DyadicRational::operator+=(const DyadicRational& o) {
  if (o.exp_ > exp_) {
    mpz_mul_2exp(num_.get_mpz_t(), num_.get_mpz_t(), o.exp_ - exp_);
    exp_ = o.exp_;
    num_ += o.num_;
  } else {
    mpz_class tmp;
    mpz_mul_2exp(tmp.get_mpz_t(), o.num_.get_mpz_t(), exp_ - o.exp_);
    num_ += tmp;
  }
  normalize();
  return *this;
}

DyadicRational& DyadicRational::operator-=(const DyadicRational& o) { return *this += -o; }

DyadicRational& DyadicRational::operator*=(const DyadicRational& o) {
  num_ *= o.num_;
  exp_ += o.exp_;
  normalize();
  return *this;
}

DyadicRational DyadicRational::times_pow2(int k) const {
  DyadicRational out = *this;
  if (out.is_zero()) return out;
  if (k >= 0) {
    const auto absorbed = std::min<unsigned>(static_cast<unsigned>(k), out.exp_);
    out.exp_ -= absorbed;
    if (static_cast<unsigned>(k) > absorbed)
      mpz_mul_2exp(out.num_.get_mpz_t(), out.num_.get_mpz_t(), static_cast<unsigned>(k) - absorbed);
  } else {
    out.exp_ += static_cast<unsigned>(-k);
  }
  return out;
}

std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
  const unsigned k = std::max(a.exp_, b.exp_);
  const int c = cmp(a.scaled_numerator(k), b.scaled_numerator(k));
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

DyadicRational abs(const DyadicRational& v) { return v.sign() < 0 ? -v : v; }

int order(std::span<const int> shape) {
  int total = 0;
  for (int j : shape) total += std::max(j, 0);
  return total;
}

DyadicIndex::DyadicIndex(Shape shape, std::vector<std::uint64_t> position)
    : j(std::move(shape)), m(std::move(position)) {
  if (!valid()) throw DomainError("invalid dyadic index");
}

bool DyadicIndex::valid() const {
  if (j.size() != m.size() || j.empty()) return false;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (j[k] < -1 || j[k] > 63) return false;
    const std::uint64_t limit = j[k] <= 0 ? 1 : (std::uint64_t{1} << j[k]);
    if (m[k] >= limit) return false;
  }
  return true;
}

DyadicRational DyadicBox::volume() const {
  DyadicRational v(1);
  for (const auto& side : sides) v *= side.upper - side.lower;
  return v;
}

bool DyadicBox::contains(std::span<const DyadicRational> x) const {
  if (x.size() != sides.size()) throw DomainError("dimension mismatch");
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < sides[k].lower || !(x[k] < sides[k].upper)) return false;
  return true;
}

DyadicBox box_of(const DyadicIndex& index) {
  if (!index.valid()) throw DomainError("box_of: invalid dyadic index");
  DyadicBox box;
  box.sides.reserve(index.j.size());
  for (std::size_t k = 0; k < index.j.size(); ++k) {
    if (index.j[k] < 0) {
      box.sides.push_back({DyadicRational(0), DyadicRational(1)});
    } else {
      const auto level = static_cast<unsigned>(index.j[k]);
      box.sides.push_back({DyadicRational(mpz_class(std::to_string(index.m[k])), level),
                           DyadicRational(mpz_class(std::to_string(index.m[k] + 1)), level)});
    }
  }
  return box;
}

int haar_eval(const DyadicIndex& index, std::span<const DyadicRational> x) {
  if (!index.valid()) throw DomainError("haar_eval: invalid dyadic index");
  if (x.size() != index.j.size()) throw DomainError("haar_eval: dimension mismatch");
  int value = 1;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k].sign() < 0 || !(x[k] < DyadicRational(1)))
      throw DomainError("haar_eval: point outside [0,1)^d");
    if (index.j[k] < 0) continue;
    // Position of x_k on the grid one level finer than the box.
    const auto level = static_cast<unsigned>(index.j[k]) + 1;
    mpz_class cell;
    mpz_fdiv_q_2exp(cell.get_mpz_t(), x[k].scaled_numerator(std::max(level, x[k].exponent())).get_mpz_t(),
                    std::max(level, x[k].exponent()) - level);
    const mpz_class left = mpz_class(std::to_string(index.m[k])) * 2;
    if (cell == left) continue;
    if (cell == left + 1) {
      value = -value;
      continue;
    }
    return 0;
  }
  return value;
}

namespace {

void compositions(int d, int remaining, Shape& current, std::vector<Shape>& out) {
  const auto k = current.size();
  if (k + 1 == static_cast<std::size_t>(d)) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current.push_back(v);
    compositions(d, remaining - v, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<Shape> enumerate_shapes(int d, int n) {
  if (d < 1 || n < 0) throw DomainError("enumerate_shapes: need d >= 1 and n >= 0");
  std::vector<Shape> out;
  Shape current;
  compositions(d, n, current, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Shape> enumerate_level_box(int d, int max_level) {
  if (d < 1 || max_level < -1) throw DomainError("enumerate_level_box: bad arguments");
  std::vector<Shape> out;
  Shape current(static_cast<std::size_t>(d), -1);
  while (true) {
    out.push_back(current);
    int k = d - 1;
    while (k >= 0 && current[static_cast<std::size_t>(k)] == max_level) {
      current[static_cast<std::size_t>(k)] = -1;
      --k;
    }
    if (k < 0) break;
    ++current[static_cast<std::size_t>(k)];
  }
  return out;
}

std::uint64_t pack_position(std::span<const int> shape, std::span<const std::uint64_t> m) {
  if (order(shape) > 64) throw DomainError("pack_position: |j| exceeds 64 bits");
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const int bits = std::max(shape[k], 0);
    if (bits == 0) continue;
    key = bits == 64 ? m[k] : (key << bits) | m[k];
  }
  return key;
}

std::vector<std::uint64_t> unpack_position(std::span<const int> shape, std::uint64_t key) {
  std::vector<std::uint64_t> m(shape.size(), 0);
  for (std::size_t k = shape.size(); k-- > 0;) {
    const int bits = std::max(shape[k], 0);
    if (bits == 0) continue;
    if (bits == 64) {
      m[k] = key;
      key = 0;
    } else {
      m[k] = key & ((std::uint64_t{1} << bits) - 1);
      key >>= bits;
    }
  }
  return m;
}

mpq_class make_q(const mpz_class& num, const mpz_class& den) {
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace disclab
