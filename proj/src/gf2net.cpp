#include "disclab/gf2net.hpp"

#include <algorithm>
#include <bit>

#include "disclab/errors.hpp"

namespace disclab {

F2Matrix::F2Matrix(int rows, int cols) : cols_(cols), rows_(static_cast<std::size_t>(rows), 0) {
  if (rows < 0 || cols < 0 || cols > 64) throw DomainError("F2Matrix: need 0 <= cols <= 64");
}

F2Matrix F2Matrix::identity(int n) {
  F2Matrix m(n, n);
  for (int r = 0; r < n; ++r) m.set(r, r, true);
  return m;
}

F2Matrix F2Matrix::reversal(int n) {
  F2Matrix m(n, n);
  for (int r = 0; r < n; ++r) m.set(r, n - 1 - r, true);
  return m;
}

void F2Matrix::set(int r, int c, bool v) {
  auto& w = rows_.at(static_cast<std::size_t>(r));
  if (c < 0 || c >= cols_) throw DomainError("F2Matrix::set: column out of range");
  const std::uint64_t bit = std::uint64_t{1} << c;
  w = v ? (w | bit) : (w & ~bit);
}

void F2Matrix::set_row(int r, std::uint64_t bits) {
  if (cols_ < 64 && (bits >> cols_) != 0) throw DomainError("F2Matrix::set_row: bits beyond column count");
  rows_.at(static_cast<std::size_t>(r)) = bits;
}

F2Matrix F2Matrix::top_rows(int count) const {
  if (count > rows()) throw DomainError("F2Matrix::top_rows: not enough rows");
  F2Matrix out(count, cols_);
  std::copy_n(rows_.begin(), count, out.rows_.begin());
  return out;
}

std::uint64_t F2Matrix::apply(std::uint64_t nu) const {
  std::uint64_t out = 0;
  for (const auto r : rows_) out = (out << 1) | static_cast<std::uint64_t>(std::popcount(r & nu) & 1);
  return out;
}

int f2_rank(std::span<const std::uint64_t> rows) {
  std::vector<std::uint64_t> basis;
  for (auto v : rows) {
    for (auto b : basis) v = std::min(v, v ^ b);
    if (v != 0) {
      basis.push_back(v);
      std::sort(basis.begin(), basis.end(), std::greater<>());
    }
  }
  return static_cast<int>(basis.size());
}

void DigitalNetSpec::validate() const {
  if (d < 1) throw DomainError("net spec: dimension must be positive");
  if (n < 0 || n > 63) throw DomainError("net spec: n out of range");
  if (sigma < 1) throw DomainError("net spec: order must be at least 1");
  if (sigma * n > PointSet::kMaxPrecision) throw DomainError("net spec: sigma*n exceeds 62 bits");
  if (matrices.size() != static_cast<std::size_t>(d))
    throw DomainError("net spec: expected " + std::to_string(d) + " matrices");
  for (const auto& c : matrices)
    if (c.rows() != sigma * n || c.cols() != n)
      throw DomainError("net spec: each matrix must be (sigma*n) x n");
  if (t && (*t < 0 || *t > sigma * n)) throw DomainError("net spec: t outside [0, sigma*n]");
}

PointSet digital_points(const DigitalNetSpec& spec) {
  spec.validate();
  const int precision = spec.precision_bits();
  const std::uint64_t count = std::uint64_t{1} << spec.n;
  std::vector<std::uint64_t> coords;
  coords.reserve(count * static_cast<std::uint64_t>(spec.d));
  for (std::uint64_t nu = 0; nu < count; ++nu)
    for (const auto& c : spec.matrices) coords.push_back(c.apply(nu));
  return PointSet(spec.d, precision, std::move(coords));
}

namespace {

// Rows chosen in one coordinate: the min(eta, sigma) largest row indices
// carry weight, all smaller indices may be added for free once sigma rows
// are weighted. Only maximal selections need checking.
struct Pattern {
  int weight;
  std::vector<int> rows;  // 0-based row indices
};

void collect_patterns(int rows, int sigma, int max_weight, int upper, std::vector<int>& chosen,
                      int weight, std::vector<Pattern>& out) {
  // Record the selection so far.
  Pattern p{weight, {}};
  for (int r : chosen) p.rows.push_back(r - 1);
  if (static_cast<int>(chosen.size()) == sigma) {
    for (int r = 1; r < chosen.back(); ++r) p.rows.push_back(r - 1);
    out.push_back(std::move(p));
    return;
  }
  out.push_back(std::move(p));
  for (int next = std::min(upper, max_weight - weight); next >= 1; --next) {
    chosen.push_back(next);
    collect_patterns(rows, sigma, max_weight, next - 1, chosen, weight + next, out);
    chosen.pop_back();
  }
}

struct Basis {
  std::vector<std::uint64_t> pivots;  // reduced rows, distinct leading bits

  bool insert(std::uint64_t v) {
    for (auto b : pivots) v = std::min(v, v ^ b);
    if (v == 0) return false;
    pivots.push_back(v);
    std::sort(pivots.begin(), pivots.end(), std::greater<>());
    return true;
  }
};

class SelectionChecker {
 public:
  SelectionChecker(const DigitalNetSpec& spec, int sigma, int max_weight, std::uint64_t limit)
      : spec_(spec), budget_(max_weight), limit_(limit) {
    const int rows = std::min(sigma * spec.n, spec.matrices.front().rows());
    patterns_.resize(static_cast<std::size_t>(spec.d));
    for (int i = 0; i < spec.d; ++i) {
      std::vector<int> chosen;
      collect_patterns(rows, sigma, max_weight, rows, chosen, 0, patterns_[static_cast<std::size_t>(i)]);
      auto& list = patterns_[static_cast<std::size_t>(i)];
      std::sort(list.begin(), list.end(), [](const Pattern& a, const Pattern& b) { return a.weight < b.weight; });
    }
  }

  bool run() { return recurse(0, budget_, Basis{}); }

 private:
  bool recurse(int coord, int remaining, const Basis& basis) {
    if (coord == spec_.d) return true;
    const auto& matrix = spec_.matrices[static_cast<std::size_t>(coord)];
    for (const auto& p : patterns_[static_cast<std::size_t>(coord)]) {
      if (p.weight > remaining) break;
      if (++work_ > limit_) throw ResourceError("verify_net_order: work limit exceeded");
      Basis next = basis;
      bool independent = true;
      for (int r : p.rows) {
        if (!next.insert(matrix.row(r))) {
          independent = false;
          break;
        }
      }
      if (!independent) return false;
      if (!recurse(coord + 1, remaining - p.weight, next)) return false;
    }
    return true;
  }

  const DigitalNetSpec& spec_;
  int budget_;
  std::uint64_t limit_;
  std::uint64_t work_ = 0;
  std::vector<std::vector<Pattern>> patterns_;
};

}  // namespace

bool verify_net_order(const DigitalNetSpec& spec, int sigma, int t, const NetCheckOptions& opts) {
  spec.validate();
  if (sigma < 1) throw DomainError("verify_net_order: order must be at least 1");
  if (sigma * spec.n > spec.matrices.front().rows())
    throw DomainError("verify_net_order: matrices have fewer than sigma*n rows");
  if (t < 0 || t > sigma * spec.n) throw DomainError("verify_net_order: t outside [0, sigma*n]");
  const int max_weight = sigma * spec.n - t;
  if (max_weight == 0) return true;
  SelectionChecker checker(spec, sigma, max_weight, opts.work_limit);
  return checker.run();
}

int minimal_t(const DigitalNetSpec& spec, int sigma, const NetCheckOptions& opts) {
  int lo = 0;
  int hi = sigma * spec.n;  // always passes
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (verify_net_order(spec, sigma, mid, opts))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

DigitalNetSpec interlace(const DigitalNetSpec& base, int sigma) {
  base.validate();
  if (sigma < 1) throw DomainError("interlace: order must be at least 1");
  if (base.sigma != 1) throw DomainError("interlace: base net must have order 1");
  if (base.d % sigma != 0) throw DomainError("interlace: base dimension not divisible by sigma");
  if (sigma == 1) return base;
  DigitalNetSpec out;
  out.d = base.d / sigma;
  out.n = base.n;
  out.sigma = sigma;
  for (int i = 0; i < out.d; ++i) {
    F2Matrix c(sigma * base.n, base.n);
    for (int lambda = 0; lambda < base.n; ++lambda)
      for (int u = 0; u < sigma; ++u)
        c.set_row(lambda * sigma + u, base.matrices[static_cast<std::size_t>(i * sigma + u)].row(lambda));
    out.matrices.push_back(std::move(c));
  }
  out.validate();
  return out;
}

BoxCounts box_point_counts(const PointSet& ps, std::span<const int> shape) {
  if (shape.size() != static_cast<std::size_t>(ps.dimension()))
    throw DomainError("box_point_counts: shape dimension mismatch");
  for (int j : shape)
    if (j < -1 || j > 63) throw DomainError("box_point_counts: level out of range");
  BoxCounts counts;
  for (std::size_t i = 0; i < ps.size(); ++i) ++counts[box_position(ps, i, shape)];
  return counts;
}

}  // namespace disclab
