#include "disclab/point_set.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "disclab/errors.hpp"

namespace disclab {

PointSet::PointSet(int d, int precision_bits) : d_(d), precision_(precision_bits) {
  if (d < 1) throw DomainError("PointSet: dimension must be positive");
  if (precision_bits < 0 || precision_bits > kMaxPrecision)
    throw DomainError("PointSet: precision_bits must lie in [0, 62]");
}

PointSet::PointSet(int d, int precision_bits, std::vector<std::uint64_t> scaled_coordinates)
    : PointSet(d, precision_bits) {
  if (scaled_coordinates.size() % static_cast<std::size_t>(d) != 0)
    throw DomainError("PointSet: coordinate count not divisible by dimension");
  const std::uint64_t one = std::uint64_t{1} << precision_bits;
  for (auto c : scaled_coordinates)
    if (c >= one) throw DomainError("PointSet: coordinate outside [0,1)");
  coords_ = std::move(scaled_coordinates);
}

PointSet PointSet::from_dyadic(int d, int precision_bits,
                               const std::vector<std::vector<DyadicRational>>& points) {
  PointSet ps(d, precision_bits);
  std::vector<std::uint64_t> row(static_cast<std::size_t>(d));
  for (const auto& p : points) {
    if (p.size() != static_cast<std::size_t>(d)) throw DomainError("PointSet: dimension mismatch");
    for (int k = 0; k < d; ++k) {
      const auto& x = p[static_cast<std::size_t>(k)];
      if (x.exponent() > static_cast<unsigned>(precision_bits))
        throw DomainError("PointSet: coordinate " + x.to_string() + " finer than precision_bits");
      if (x.sign() < 0 || !(x < DyadicRational(1)))
        throw DomainError("PointSet: coordinate " + x.to_string() + " outside [0,1)");
      row[static_cast<std::size_t>(k)] =
          x.scaled_numerator(static_cast<unsigned>(precision_bits)).get_ui();
    }
    ps.push_back(row);
  }
  return ps;
}

DyadicRational PointSet::coordinate(std::size_t i, int k) const {
  return DyadicRational::from_int128(static_cast<Int128>(scaled(i, k)), static_cast<unsigned>(precision_));
}

std::vector<DyadicRational> PointSet::point(std::size_t i) const {
  std::vector<DyadicRational> out;
  out.reserve(static_cast<std::size_t>(d_));
  for (int k = 0; k < d_; ++k) out.push_back(coordinate(i, k));
  return out;
}

double PointSet::coordinate_double(std::size_t i, int k) const {
  return std::ldexp(static_cast<double>(scaled(i, k)), -precision_);
}

void PointSet::push_back(std::span<const std::uint64_t> scaled_point) {
  if (scaled_point.size() != static_cast<std::size_t>(d_)) throw DomainError("PointSet: dimension mismatch");
  const std::uint64_t one = std::uint64_t{1} << precision_;
  for (auto c : scaled_point)
    if (c >= one) throw DomainError("PointSet: coordinate outside [0,1)");
  coords_.insert(coords_.end(), scaled_point.begin(), scaled_point.end());
}

PointSet PointSet::with_precision(int precision_bits) const {
  if (precision_bits < precision_) throw DomainError("with_precision: cannot coarsen losslessly");
  std::vector<std::uint64_t> c = coords_;
  for (auto& v : c) v <<= (precision_bits - precision_);
  return PointSet(d_, precision_bits, std::move(c));
}

int PointSet::minimal_precision() const {
  int needed = 0;
  for (auto c : coords_)
    if (c != 0) needed = std::max(needed, precision_ - std::countr_zero(c));
  return needed;
}

std::vector<std::uint64_t> box_position(const PointSet& ps, std::size_t i, std::span<const int> shape) {
  std::vector<std::uint64_t> m(shape.size(), 0);
  const int p = ps.precision_bits();
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const int j = shape[k];
    if (j <= 0) continue;
    const auto z = ps.scaled(i, static_cast<int>(k));
    m[k] = j >= p ? (z << (j - p)) : (z >> (p - j));
  }
  return m;
}

}  // namespace disclab
