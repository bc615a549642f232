#include "disclab/haar.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "disclab/errors.hpp"
#include "disclab/parallel.hpp"

namespace disclab {

namespace {

Int128 to_int128(const mpz_class& v) {
  if (mpz_sizeinbase(v.get_mpz_t(), 2) > 126) throw ResourceError("coefficient numerator exceeds 126 bits");
  const mpz_class a = abs(v);
  Int128 out = 0;
  const std::size_t limbs = mpz_size(a.get_mpz_t());
  for (std::size_t i = limbs; i-- > 0;) {
    out <<= 64;
    out |= static_cast<Int128>(static_cast<std::uint64_t>(mpz_getlimbn(a.get_mpz_t(), static_cast<mp_size_t>(i))));
  }
  return sgn(v) < 0 ? -out : out;
}

mpz_class pow2z(unsigned k) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), k);
  return r;
}

// floor(x * 2^level) for x in [0,1).
std::uint64_t cell_of(const DyadicRational& x, int level) {
  if (level <= 0) return 0;
  mpz_class v;
  const unsigned e = x.exponent();
  if (static_cast<unsigned>(level) >= e)
    mpz_mul_2exp(v.get_mpz_t(), x.numerator().get_mpz_t(), static_cast<unsigned>(level) - e);
  else
    mpz_fdiv_q_2exp(v.get_mpz_t(), x.numerator().get_mpz_t(), e - static_cast<unsigned>(level));
  return v.get_ui();
}

struct Side {
  int level;
  std::uint64_t m;
};

std::vector<Side> sides_of(const DyadicIndex& b) {
  std::vector<Side> s;
  for (std::size_t k = 0; k < b.j.size(); ++k) s.push_back({std::max(b.j[k], 0), b.m[k]});
  return s;
}

// Coarse side contains fine side.
bool side_contains(const Side& outer, const Side& inner) {
  return outer.level <= inner.level && (inner.m >> (inner.level - outer.level)) == outer.m;
}

bool covered(std::vector<Side>& box, const std::vector<std::vector<Side>>& region) {
  const std::vector<Side>* partial = nullptr;
  for (const auto& r : region) {
    bool contains = true, meets = true;
    for (std::size_t k = 0; k < box.size(); ++k) {
      contains = contains && side_contains(r[k], box[k]);
      meets = meets && (side_contains(r[k], box[k]) || side_contains(box[k], r[k]));
    }
    if (contains) return true;
    if (meets && !partial) partial = &r;
  }
  if (!partial) return false;
  std::size_t k = 0;
  while (!((*partial)[k].level > box[k].level)) ++k;
  const Side saved = box[k];
  bool ok = true;
  for (std::uint64_t half = 0; half < 2 && ok; ++half) {
    box[k] = {saved.level + 1, 2 * saved.m + half};
    ok = covered(box, region);
  }
  box[k] = saved;
  return ok;
}

}  // namespace

DyadicRational coeff_linear(std::span<const int> shape, std::size_t n_points) {
  unsigned exponent = 0;
  bool negative = false;
  for (int j : shape) {
    if (j < -1) throw DomainError("coeff_linear: level below -1");
    if (j == -1) {
      exponent += 1;
    } else {
      exponent += static_cast<unsigned>(2 * j + 2);
      negative = !negative;
    }
  }
  mpz_class num = static_cast<unsigned long>(n_points);
  if (negative) num = -num;
  return DyadicRational(num, exponent);
}

DyadicRational coeff_point(const DyadicIndex& index, std::span<const DyadicRational> z) {
  if (!index.valid()) throw DomainError("coeff_point: invalid index");
  if (z.size() != index.dimension()) throw DomainError("coeff_point: dimension mismatch");
  DyadicRational out(1);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const int j = index.j[k];
    if (j == -1) {
      out *= DyadicRational(1) - z[k];
      continue;
    }
    const DyadicRational half = DyadicRational::pow2(j + 1);
    const DyadicRational r = z[k] - DyadicRational(mpz_class(static_cast<unsigned long>(index.m[k])), static_cast<unsigned>(j));
    if (r.sign() <= 0 || !(r < half + half)) return DyadicRational(0);
    out *= r < half ? -r : r - half - half;
  }
  return out;
}

DyadicRational coeff_discrepancy(const PointSet& ps, const DyadicIndex& index) {
  if (index.dimension() != static_cast<std::size_t>(ps.dimension()))
    throw DomainError("coeff_discrepancy: dimension mismatch");
  DyadicRational sum(0);
  for (std::size_t i = 0; i < ps.size(); ++i) sum += coeff_point(index, ps.point(i));
  return sum - coeff_linear(index.j, ps.size());
}

HaarCoefficientTable::HaarCoefficientTable(const PointSet& ps, const TableOptions& opts) {
  d_ = ps.dimension();
  precision_ = ps.precision_bits();
  max_level_ = opts.max_level.value_or(precision_);
  n_points_ = ps.size();
  from_points_ = true;
  if (max_level_ < -1) throw DomainError("coefficient_table: max_level below -1");
  const double shapes = std::pow(static_cast<double>(max_level_ + 2), d_);
  if (shapes * std::max<double>(1.0, static_cast<double>(n_points_)) > opts.budget)
    throw ResourceError("coefficient_table: shapes * N exceeds budget");
  exponent_ = static_cast<unsigned>(d_ * precision_);
  if (static_cast<double>(exponent_) + std::log2(static_cast<double>(n_points_) + 1) > 125)
    throw ResourceError("coefficient_table: d * precision_bits too large for 128-bit numerators");

  const std::int64_t one = std::int64_t{1} << precision_;
  const auto shape_list = enumerate_level_box(d_, max_level_);
  blocks_.resize(shape_list.size());
  parallel_for(shape_list.size(), [&](std::size_t s) {
    Block& b = blocks_[s];
    b.j = shape_list[s];
    for (int j : b.j)
      if (j >= precision_) return;  // counting part vanishes
    if (order(b.j) > 64) throw ResourceError("coefficient_table: |j| exceeds 64 bits");
    std::vector<std::pair<std::uint64_t, Int128>> terms;
    terms.reserve(n_points_);
    for (std::size_t i = 0; i < n_points_; ++i) {
      std::uint64_t key = 0;
      Int128 g = 1;
      for (int k = 0; k < d_ && g != 0; ++k) {
        const int j = b.j[static_cast<std::size_t>(k)];
        const auto z = static_cast<std::int64_t>(ps.scaled(i, k));
        if (j == -1) {
          g *= one - z;
          continue;
        }
        const int shift = precision_ - j;
        const std::int64_t m = z >> shift;
        const std::int64_t r = z - (m << shift);
        const std::int64_t h = std::int64_t{1} << (shift - 1);
        if (r == 0) {
          g = 0;
          break;
        }
        g *= r < h ? -r : r - 2 * h;
        if (j > 0) key = (key << j) | static_cast<std::uint64_t>(m);
      }
      if (g != 0) terms.emplace_back(key, g);
    }
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
    for (std::size_t i = 0; i < terms.size();) {
      Int128 sum = 0;
      std::size_t e = i;
      for (; e < terms.size() && terms[e].first == terms[i].first; ++e) sum += terms[e].second;
      if (sum != 0) {
        b.keys.push_back(terms[i].first);
        b.counting.push_back(sum);
      }
      i = e;
    }
  });
  index_blocks();
}

HaarCoefficientTable HaarCoefficientTable::from_entries(
    int d, const std::vector<std::pair<DyadicIndex, DyadicRational>>& entries, const std::vector<Shape>& shapes) {
  if (d < 1) throw DomainError("from_entries: dimension must be positive");
  HaarCoefficientTable t;
  t.d_ = d;
  t.max_level_ = -1;
  for (const auto& [idx, v] : entries) {
    if (idx.dimension() != static_cast<std::size_t>(d) || !idx.valid())
      throw DomainError("from_entries: invalid index");
    t.exponent_ = std::max(t.exponent_, v.exponent());
  }
  std::map<Shape, std::map<std::uint64_t, Int128>> grouped;
  for (const auto& s : shapes) {
    if (s.size() != static_cast<std::size_t>(d)) throw DomainError("from_entries: shape dimension mismatch");
    grouped[s];
  }
  for (const auto& [idx, v] : entries) {
    const Int128 num = to_int128(v.scaled_numerator(t.exponent_));
    auto& slot = grouped[idx.j][pack_position(idx.j, idx.m)];
    slot += num;
  }
  for (const auto& [j, values] : grouped) {
    Block b;
    b.j = j;
    for (int level : j) t.max_level_ = std::max(t.max_level_, level);
    for (const auto& [key, num] : values) {
      if (num == 0) continue;
      b.keys.push_back(key);
      b.counting.push_back(num);
    }
    t.blocks_.push_back(std::move(b));
  }
  t.index_blocks();
  return t;
}

void HaarCoefficientTable::index_blocks() {
  by_shape_.clear();
  for (std::size_t i = 0; i < blocks_.size(); ++i) by_shape_.emplace(blocks_[i].j, i);
}

const HaarCoefficientTable::Block* HaarCoefficientTable::find(std::span<const int> shape) const {
  const auto it = by_shape_.find(Shape(shape.begin(), shape.end()));
  return it == by_shape_.end() ? nullptr : &blocks_[it->second];
}

double HaarCoefficientTable::logical_size() const {
  double total = 0;
  for (const auto& b : blocks_) total += std::ldexp(1.0, order(b.j));
  return total;
}

std::size_t HaarCoefficientTable::stored_entries() const {
  std::size_t total = 0;
  for (const auto& b : blocks_) total += b.keys.size();
  return total;
}

DyadicRational HaarCoefficientTable::counting(const DyadicIndex& index) const {
  const Block* b = find(index.j);
  if (!b) throw DomainError("HaarCoefficientTable: shape not covered");
  const std::uint64_t key = pack_position(index.j, index.m);
  const auto it = std::lower_bound(b->keys.begin(), b->keys.end(), key);
  if (it == b->keys.end() || *it != key) return DyadicRational(0);
  return DyadicRational::from_int128(b->counting[static_cast<std::size_t>(it - b->keys.begin())], exponent_);
}

long double HaarCoefficientTable::linear_ld(std::span<const int> shape) const {
  if (n_points_ == 0) return 0.0L;
  return coeff_linear(shape, n_points_).to_long_double();
}

long double HaarCoefficientTable::counting_ld(Int128 numerator) const {
  return std::ldexp(static_cast<long double>(numerator), -static_cast<int>(exponent_));
}

long double HaarCoefficientTable::coefficient_ld(const Block& block, std::uint64_t key) const {
  const auto it = std::lower_bound(block.keys.begin(), block.keys.end(), key);
  long double c = 0.0L;
  if (it != block.keys.end() && *it == key)
    c = counting_ld(block.counting[static_cast<std::size_t>(it - block.keys.begin())]);
  return c - linear_ld(block.j);
}

void HaarCoefficientTable::write_csv(std::ostream& os, bool all_positions) const {
  for (int k = 1; k <= d_; ++k) os << "j_" << k << ",";
  for (int k = 1; k <= d_; ++k) os << "m_" << k << ",";
  os << "counting_num,counting_exp,linear_num,linear_exp\n";
  for (const auto& b : blocks_) {
    const DyadicRational lin = coeff_linear(b.j, n_points_);
    auto emit = [&](std::uint64_t key, const DyadicRational& c) {
      for (int j : b.j) os << j << ",";
      for (auto m : unpack_position(b.j, key)) os << m << ",";
      os << c.numerator().get_str() << "," << c.exponent() << "," << lin.numerator().get_str() << ","
         << lin.exponent() << "\n";
    };
    if (all_positions) {
      const int ord = order(b.j);
      if (ord > 24) throw ResourceError("write_csv: too many positions for a full dump");
      std::size_t pos = 0;
      for (std::uint64_t key = 0; key < (std::uint64_t{1} << ord); ++key) {
        if (pos < b.keys.size() && b.keys[pos] == key)
          emit(key, DyadicRational::from_int128(b.counting[pos++], exponent_));
        else
          emit(key, DyadicRational(0));
      }
    } else {
      for (std::size_t i = 0; i < b.keys.size(); ++i)
        emit(b.keys[i], DyadicRational::from_int128(b.counting[i], exponent_));
    }
  }
}

double square_function(const HaarCoefficientTable& table, const std::vector<Shape>& shapes,
                       std::span<const DyadicRational> x) {
  if (x.size() != static_cast<std::size_t>(table.dimension())) throw DomainError("square_function: dimension mismatch");
  long double sum = 0.0L;
  std::vector<std::uint64_t> m(x.size());
  for (const auto& j : shapes) {
    const auto* b = table.find(j);
    if (!b) throw DomainError("square_function: shape not covered by table");
    for (std::size_t k = 0; k < x.size(); ++k) m[k] = cell_of(x[k], j[k]);
    const long double c = table.coefficient_ld(*b, pack_position(j, m));
    sum += std::ldexp(c * c, 2 * order(j));
  }
  return static_cast<double>(std::sqrt(sum));
}

mpq_class parseval_l2_squared(const HaarCoefficientTable& table) {
  const int d = table.dimension();
  const int big_j = table.max_level();
  if (table.from_points() && big_j < table.precision_bits() - 1)
    throw DomainError("parseval_l2: table truncated below precision_bits - 1");
  const mpz_class scale = pow2z(table.counting_exponent());
  mpq_class total = 0;
  for (const auto& b : table.blocks()) {
    const unsigned ord = static_cast<unsigned>(order(b.j));
    mpz_class s1 = 0, s2 = 0, num;
    for (auto c : b.counting) {
      num = to_mpz(c);
      s1 += num;
      s2 += num * num;
    }
    const mpq_class lin = coeff_linear(b.j, table.point_count()).to_mpq();
    mpq_class block = make_q(s2, scale * scale);
    block -= 2 * lin * make_q(s1, scale);
    block += mpq_class(pow2z(ord)) * lin * lin;
    block *= mpq_class(pow2z(ord));
    total += block;
  }
  if (table.from_points()) {
    // Linear coefficients with some j_k > J: N^2 [(1/3)^d - (1/3 - 4^{-J-2}/3)^d].
    mpq_class full(1, 3), kept = mpq_class(1, 3) - mpq_class(1, 3) / mpq_class(pow2z(static_cast<unsigned>(2 * big_j + 4)));
    mpq_class full_d = 1, kept_d = 1;
    for (int k = 0; k < d; ++k) {
      full_d *= full;
      kept_d *= kept;
    }
    const mpq_class n = mpz_class(static_cast<unsigned long>(table.point_count()));
    total += n * n * (full_d - kept_d);
  }
  total.canonicalize();
  return total;
}

NormReport parseval_l2(const HaarCoefficientTable& table) {
  const mpq_class sq = parseval_l2_squared(table);
  NormReport r;
  r.value = std::sqrt(sq.get_d());
  r.method = NormMethod::Parseval;
  r.params = {{"N", table.point_count()}, {"d", table.dimension()}, {"max_level", table.max_level()},
              {"squared", sq.get_str()}};
  return r;
}

bool box_in_union(const DyadicIndex& box, const std::vector<DyadicIndex>& region) {
  std::vector<std::vector<Side>> sides;
  for (const auto& r : region) {
    if (r.dimension() != box.dimension()) throw DomainError("box_in_union: dimension mismatch");
    sides.push_back(sides_of(r));
  }
  auto b = sides_of(box);
  return covered(b, sides);
}

DyadicRational maximal_interval_mass(const HaarCoefficientTable& table, const std::vector<DyadicIndex>& region,
                                     int n) {
  // Candidates grouped by shape, keys ascending.
  std::map<Shape, std::vector<std::uint64_t>> cand;
  for (const auto& b : table.blocks()) {
    if (std::any_of(b.j.begin(), b.j.end(), [](int j) { return j < 0; })) continue;
    if (order(b.j) < n) continue;
    std::vector<std::uint64_t> keys;
    for (auto key : b.keys)
      if (box_in_union(DyadicIndex(b.j, unpack_position(b.j, key)), region)) keys.push_back(key);
    if (!keys.empty()) cand.emplace(b.j, std::move(keys));
  }
  auto present = [&](const Shape& j, const std::vector<std::uint64_t>& m) {
    const auto it = cand.find(j);
    if (it == cand.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), pack_position(j, m));
  };

  std::map<int, std::uint64_t> per_order;
  for (const auto& [j, keys] : cand) {
    for (auto key : keys) {
      const auto m = unpack_position(j, key);
      // Walk every proper ancestor shape a <= j with |a| >= n.
      Shape a(j.size(), 0);
      bool maximal = true;
      for (;;) {
        if (a != j && order(a) >= n) {
          std::vector<std::uint64_t> am(j.size());
          for (std::size_t k = 0; k < j.size(); ++k) am[k] = m[k] >> (j[k] - a[k]);
          if (present(a, am)) {
            maximal = false;
            break;
          }
        }
        std::size_t k = 0;
        while (k < j.size() && a[k] == j[k]) a[k++] = 0;
        if (k == j.size()) break;
        ++a[k];
      }
      if (maximal) ++per_order[order(j)];
    }
  }
  DyadicRational total(0);
  for (const auto& [ord, count] : per_order)
    total += DyadicRational(mpz_class(static_cast<unsigned long>(count)), static_cast<unsigned>(ord));
  return total;
}

}  // namespace disclab
