#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disclab/dyadic.hpp"
#include "disclab/point_set.hpp"

namespace disclab {

/// Binary matrix with at most 64 columns. Row r is a word whose bit c is
/// the entry in column c; column c multiplies digit nu_c of the index.
class F2Matrix {
 public:
  F2Matrix() = default;
  F2Matrix(int rows, int cols);
  static F2Matrix identity(int n);
  /// Anti-diagonal: row r picks digit n-1-r.
  static F2Matrix reversal(int n);

  int rows() const noexcept { return static_cast<int>(rows_.size()); }
  int cols() const noexcept { return cols_; }
  bool get(int r, int c) const { return (rows_[static_cast<std::size_t>(r)] >> c) & 1U; }
  void set(int r, int c, bool v);
  std::uint64_t row(int r) const { return rows_[static_cast<std::size_t>(r)]; }
  void set_row(int r, std::uint64_t bits);
  std::span<const std::uint64_t> row_words() const noexcept { return rows_; }

  /// The first `count` rows.
  F2Matrix top_rows(int count) const;
  /// Output digits of C * nu as a word, first output digit in the most
  /// significant of the `rows()` low bits.
  std::uint64_t apply(std::uint64_t nu) const;

  friend bool operator==(const F2Matrix&, const F2Matrix&) = default;

 private:
  int cols_ = 0;
  std::vector<std::uint64_t> rows_;
};

/// Rank over F2 of a set of row words (bit-parallel elimination).
int f2_rank(std::span<const std::uint64_t> rows);

struct DigitalNetSpec {
  int d = 0;
  int n = 0;
  int sigma = 1;
  std::vector<F2Matrix> matrices;
  std::optional<int> t;

  int precision_bits() const noexcept { return sigma * n; }
  /// Throws DomainError when shapes are inconsistent.
  void validate() const;
};

/// The 2^n points x_nu, nu = 0..2^n-1, with precision sigma*n bits.
PointSet digital_points(const DigitalNetSpec& spec);

struct NetCheckOptions {
  /// Maximum number of independence checks before giving up.
  std::uint64_t work_limit = 100'000'000;
};

/// True iff every admissible row selection for quality t and order sigma is
/// linearly independent. Rows beyond sigma*n are ignored. Throws
/// ResourceError when the work limit is exceeded.
bool verify_net_order(const DigitalNetSpec& spec, int sigma, int t, const NetCheckOptions& opts = {});

/// Smallest t in [0, sigma*n] for which verify_net_order holds.
int minimal_t(const DigitalNetSpec& spec, int sigma, const NetCheckOptions& opts = {});

/// Order-sigma net in d dimensions from an order-1 net in sigma*d dimensions.
DigitalNetSpec interlace(const DigitalNetSpec& base, int sigma);

using BoxCounts = std::map<std::vector<std::uint64_t>, std::size_t>;

/// Number of points in each nonempty box I_{j,m} of the given shape.
BoxCounts box_point_counts(const PointSet& ps, std::span<const int> shape);

// Bundled generating matrices.

std::vector<std::string> builtin_net_names();

/// Order-1 base matrices of a named family in `dims` dimensions, n columns.
/// "hammersley": identity, reversal, then Sobol coordinates 2, 3, ...
/// "sobol": Sobol coordinates 1, 2, ... (Joe-Kuo direction numbers)
/// "zero": all-zero matrices.
DigitalNetSpec builtin_base(const std::string& name, int dims, int n);

/// Order-sigma net in d dimensions: builtin_base(name, sigma*d, n) interlaced.
DigitalNetSpec builtin_net(const std::string& name, int d, int n, int sigma);

/// Largest dimension the bundled direction numbers support for `name`.
int builtin_max_dimension(const std::string& name);

}  // namespace disclab
