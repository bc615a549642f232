#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "disclab/dyadic.hpp"
#include "disclab/norm_report.hpp"
#include "disclab/point_set.hpp"

namespace disclab {

/// <N x_1...x_d, h_{j,m}>; independent of m.
DyadicRational coeff_linear(std::span<const int> shape, std::size_t n_points);
inline DyadicRational coeff_linear(const DyadicIndex& index, std::size_t n_points) {
  return coeff_linear(index.j, n_points);
}

/// <1_{x > z}, h_{j,m}>, the contribution of one point to the counting part.
DyadicRational coeff_point(const DyadicIndex& index, std::span<const DyadicRational> z);

/// <D_P, h_{j,m}>.
DyadicRational coeff_discrepancy(const PointSet& ps, const DyadicIndex& index);

struct TableOptions {
  /// Per-coordinate truncation J; defaults to the point precision.
  std::optional<int> max_level;
  /// Limit on (number of shapes) * N.
  double budget = 1e9;
};

/// Haar coefficients of D_P for every j in {-1..J}^d.
///
/// Counting parts are stored sparsely per shape (positions with a nonzero
/// counting coefficient), as integers over a common denominator 2^E. The
/// linear part is the closed form N * prod c(j_k); a position absent from a
/// block has counting part zero. Tables built from explicit entries have
/// N = 0, so their coefficients are the stored values.
class HaarCoefficientTable {
 public:
  struct Block {
    Shape j;
    std::vector<std::uint64_t> keys;  // packed positions, ascending
    std::vector<Int128> counting;     // numerators over 2^E
  };

  HaarCoefficientTable(const PointSet& ps, const TableOptions& opts = {});
  /// Synthetic table holding the given coefficients. Shapes listed in
  /// `shapes` are covered even without entries.
  static HaarCoefficientTable from_entries(int d, const std::vector<std::pair<DyadicIndex, DyadicRational>>& entries,
                                           const std::vector<Shape>& shapes = {});

  int dimension() const noexcept { return d_; }
  int max_level() const noexcept { return max_level_; }
  int precision_bits() const noexcept { return precision_; }
  std::size_t point_count() const noexcept { return n_points_; }
  unsigned counting_exponent() const noexcept { return exponent_; }
  /// True for tables computed from a point set (these cover {-1..J}^d).
  bool from_points() const noexcept { return from_points_; }

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const Block* find(std::span<const int> shape) const;
  bool covers(std::span<const int> shape) const { return find(shape) != nullptr; }

  /// Sum over blocks of 2^{|j|}.
  double logical_size() const;
  std::size_t stored_entries() const;

  DyadicRational counting(const DyadicIndex& index) const;
  DyadicRational linear(const DyadicIndex& index) const { return coeff_linear(index.j, n_points_); }
  DyadicRational coefficient(const DyadicIndex& index) const { return counting(index) - linear(index); }

  /// Floating views used by the norm code.
  long double linear_ld(std::span<const int> shape) const;
  long double counting_ld(Int128 numerator) const;
  /// Coefficient at a packed position of a block (linear part included).
  long double coefficient_ld(const Block& block, std::uint64_t key) const;

  /// CSV rows: j_1..j_d, m_1..m_d, counting_num, counting_exp, linear_num, linear_exp.
  /// Lists every stored position; with all_positions, also positions whose
  /// counting part is zero (only sensible for small tables).
  void write_csv(std::ostream& os, bool all_positions = false) const;

 private:
  HaarCoefficientTable() = default;
  void index_blocks();

  int d_ = 0;
  int max_level_ = 0;
  int precision_ = 0;
  std::size_t n_points_ = 0;
  unsigned exponent_ = 0;
  bool from_points_ = false;
  std::vector<Block> blocks_;
  std::map<Shape, std::size_t> by_shape_;
};

/// Table for ps with default options.
inline HaarCoefficientTable coefficient_table(const PointSet& ps, const TableOptions& opts = {}) {
  return HaarCoefficientTable(ps, opts);
}

/// (sum over shapes of 2^{2|j|} coeff(j, m(x))^2)^{1/2}.
double square_function(const HaarCoefficientTable& table, const std::vector<Shape>& shapes,
                       std::span<const DyadicRational> x);

/// Exact ||D||_2^2 from the coefficients plus the closed-form linear tail.
mpq_class parseval_l2_squared(const HaarCoefficientTable& table);
NormReport parseval_l2(const HaarCoefficientTable& table);

/// Total volume of the maximal boxes I (j in N_0^d, |j| >= n) contained in
/// the union `region` whose counting coefficient is nonzero.
DyadicRational maximal_interval_mass(const HaarCoefficientTable& table, const std::vector<DyadicIndex>& region, int n);

/// True iff the box is covered by the union of `region`.
bool box_in_union(const DyadicIndex& box, const std::vector<DyadicIndex>& region);

}  // namespace disclab
