#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "disclab/dyadic.hpp"

namespace disclab {

/// N points in [0,1)^d with coordinates that are multiples of 2^-precision_bits.
///
/// Coordinates are stored as integers scaled by 2^precision_bits, row-major.
class PointSet {
 public:
  static constexpr int kMaxPrecision = 62;

  PointSet(int d, int precision_bits);
  PointSet(int d, int precision_bits, std::vector<std::uint64_t> scaled_coordinates);
  static PointSet from_dyadic(int d, int precision_bits,
                              const std::vector<std::vector<DyadicRational>>& points);

  int dimension() const noexcept { return d_; }
  int precision_bits() const noexcept { return precision_; }
  std::size_t size() const noexcept { return d_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(d_); }
  bool empty() const noexcept { return coords_.empty(); }

  /// Coordinate k of point i scaled by 2^precision_bits.
  std::uint64_t scaled(std::size_t i, int k) const {
    return coords_[i * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)];
  }
  std::span<const std::uint64_t> scaled_point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }
  std::span<const std::uint64_t> scaled_coordinates() const noexcept { return coords_; }

  DyadicRational coordinate(std::size_t i, int k) const;
  std::vector<DyadicRational> point(std::size_t i) const;
  double coordinate_double(std::size_t i, int k) const;

  void push_back(std::span<const std::uint64_t> scaled_point);

  /// Same points written at a finer precision.
  PointSet with_precision(int precision_bits) const;
  /// Smallest precision that represents every coordinate exactly.
  int minimal_precision() const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  int d_;
  int precision_;
  std::vector<std::uint64_t> coords_;
};

/// Index of the box I_{j,m} containing point i, per coordinate.
std::vector<std::uint64_t> box_position(const PointSet& ps, std::size_t i, std::span<const int> shape);

}  // namespace disclab
