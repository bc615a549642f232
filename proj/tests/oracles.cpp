#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

mpq_class pow2q(int k) {  // 2^-k
  mpz_class den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(k));
  mpq_class r(1, 1);
  r /= den;
  return r;
}

mpq_class coord_q(const PointSet& ps, std::size_t i, int k) {
  mpq_class r(mpz_class(static_cast<unsigned long>(ps.scaled(i, k))), 1);
  return r * pow2q(ps.precision_bits());
}

mpq_class qpow(const mpq_class& x, int e) {
  mpq_class r = 1;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

void all_shapes(int d, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == d - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    cur.push_back(v);
    all_shapes(d, total - v, cur, out);
    cur.pop_back();
  }
}

// Sign of h_j on the cell with index c (grid 2^-bits) of one coordinate, or
// 0 outside the support.
int haar_sign_1d(int j, std::uint64_t m, std::uint64_t c, int bits) {
  if (j < 0) return 1;
  const std::uint64_t box = c >> (bits - j);
  if (box != m) return 0;
  const std::uint64_t half = (c >> (bits - j - 1)) & 1U;
  return half == 0 ? 1 : -1;
}

}  // namespace

// ---- nets ----

int rank_plain(std::vector<std::vector<int>> rows) {
  int rank = 0;
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    std::size_t piv = static_cast<std::size_t>(rank);
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[static_cast<std::size_t>(rank)]);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != static_cast<std::size_t>(rank) && rows[r][c])
        for (std::size_t k = 0; k < cols; ++k) rows[r][k] ^= rows[static_cast<std::size_t>(rank)][k];
    ++rank;
  }
  return rank;
}

bool net_by_subsets(const disclab::DigitalNetSpec& spec, int sigma, int t) {
  const int d = spec.d, rows = sigma * spec.n, cols = spec.n;
  if (rows * d > 24) throw std::invalid_argument("net_by_subsets: too large");
  const int limit = sigma * spec.n - t;
  const std::uint64_t masks = std::uint64_t{1} << rows;
  auto weight = [&](std::uint64_t mask) {
    int w = 0, taken = 0;
    for (int r = rows - 1; r >= 0 && taken < sigma; --r)
      if ((mask >> r) & 1U) {
        w += r + 1;
        ++taken;
      }
    return w;
  };
  std::vector<std::uint64_t> combo(static_cast<std::size_t>(d), 0);
  const std::uint64_t total = std::uint64_t{1} << (rows * d);
  for (std::uint64_t code = 0; code < total; ++code) {
    int w = 0;
    std::uint64_t rest = code;
    for (int k = 0; k < d; ++k) {
      combo[static_cast<std::size_t>(k)] = rest % masks;
      rest /= masks;
      w += weight(combo[static_cast<std::size_t>(k)]);
    }
    if (w > limit) continue;
    std::vector<std::vector<int>> selected;
    for (int k = 0; k < d; ++k)
      for (int r = 0; r < rows; ++r)
        if ((combo[static_cast<std::size_t>(k)] >> r) & 1U) {
          std::vector<int> v(static_cast<std::size_t>(cols));
          for (int c = 0; c < cols; ++c) v[static_cast<std::size_t>(c)] = spec.matrices[static_cast<std::size_t>(k)].get(r, c);
          selected.push_back(v);
        }
    if (rank_plain(selected) != static_cast<int>(selected.size())) return false;
  }
  return true;
}

bool net_by_counts(const PointSet& ps, int n, int t) {
  const int d = ps.dimension(), p = ps.precision_bits();
  std::vector<std::vector<int>> shapes;
  std::vector<int> cur;
  if (n - t < 0) return true;
  all_shapes(d, n - t, cur, shapes);
  for (const auto& j : shapes) {
    std::map<std::vector<std::uint64_t>, std::size_t> counts;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      std::vector<std::uint64_t> m(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) m[static_cast<std::size_t>(k)] = ps.scaled(i, k) >> (p - j[static_cast<std::size_t>(k)]);
      ++counts[m];
    }
    const std::size_t boxes = std::size_t{1} << (n - t);
    if (counts.size() != boxes) return false;
    for (const auto& [m, c] : counts)
      if (c != (std::size_t{1} << t)) return false;
  }
  return true;
}

// ---- coefficients ----

double midpoint_linear(const DyadicIndex& index, std::size_t n_points, int bits) {
  double total = static_cast<double>(n_points);
  const double h = std::ldexp(1.0, -bits);
  const std::uint64_t cells = std::uint64_t{1} << bits;
  for (std::size_t k = 0; k < index.j.size(); ++k) {
    double s = 0;
    for (std::uint64_t c = 0; c < cells; ++c) {
      const int sg = haar_sign_1d(index.j[k], index.m[k], c, bits);
      if (sg != 0) s += sg * (static_cast<double>(c) + 0.5) * h * h;
    }
    total *= s;
  }
  return total;
}

double midpoint_point(const DyadicIndex& index, const std::vector<double>& z, int bits) {
  double total = 1;
  const double h = std::ldexp(1.0, -bits);
  const std::uint64_t cells = std::uint64_t{1} << bits;
  for (std::size_t k = 0; k < index.j.size(); ++k) {
    double s = 0;
    for (std::uint64_t c = 0; c < cells; ++c) {
      const int sg = haar_sign_1d(index.j[k], index.m[k], c, bits);
      if (sg != 0 && (static_cast<double>(c) + 0.5) * h > z[k]) s += sg * h;
    }
    total *= s;
  }
  return total;
}

namespace {

// Calls f(cell index vector) for every cell of the 2^-bits grid in the
// support of h_{j,m}.
template <class F>
void for_support_cells(const DyadicIndex& index, int bits, F&& f) {
  const std::size_t d = index.j.size();
  std::vector<std::uint64_t> lo(d), hi(d), c(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (index.j[k] < 0) {
      lo[k] = 0;
      hi[k] = std::uint64_t{1} << bits;
    } else {
      const int w = bits - index.j[k];
      lo[k] = index.m[k] << w;
      hi[k] = (index.m[k] + 1) << w;
    }
    c[k] = lo[k];
  }
  while (true) {
    f(c);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++c[k] < hi[k]) break;
      c[k] = lo[k];
      if (k == 0) return;
    }
    if (d == 0) return;
  }
}

int cell_sign(const DyadicIndex& index, const std::vector<std::uint64_t>& c, int bits) {
  int s = 1;
  for (std::size_t k = 0; k < c.size(); ++k) s *= haar_sign_1d(index.j[k], index.m[k], c[k], bits);
  return s;
}

}  // namespace

DyadicRational exact_grid_linear(const DyadicIndex& index, std::size_t n_points, int bits) {
  DyadicRational total(0);
  const std::size_t d = index.j.size();
  for_support_cells(index, bits, [&](const std::vector<std::uint64_t>& c) {
    DyadicRational v(static_cast<long>(n_points) * cell_sign(index, c, bits));
    for (std::size_t k = 0; k < d; ++k) v *= DyadicRational(mpz_class(static_cast<unsigned long>(2 * c[k] + 1)), static_cast<unsigned>(bits + 1));
    total += v;
  });
  return total * DyadicRational::pow2(bits * static_cast<int>(d));
}

DyadicRational exact_grid_point(const DyadicIndex& index, const std::vector<DyadicRational>& z, int bits) {
  long count = 0;
  const std::size_t d = index.j.size();
  for_support_cells(index, bits, [&](const std::vector<std::uint64_t>& c) {
    for (std::size_t k = 0; k < d; ++k) {
      const DyadicRational mid(mpz_class(static_cast<unsigned long>(2 * c[k] + 1)), static_cast<unsigned>(bits + 1));
      if (!(mid > z[k])) return;
    }
    count += cell_sign(index, c, bits);
  });
  return DyadicRational(count) * DyadicRational::pow2(bits * static_cast<int>(d));
}

std::vector<mpq_class> cell_averages(const PointSet& ps, int level) {
  if (level < ps.precision_bits()) throw std::invalid_argument("cell_averages: level below precision");
  const int d = ps.dimension();
  const std::uint64_t side = std::uint64_t{1} << level;
  std::uint64_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= side;
  std::vector<mpq_class> out(cells);
  const int shift = level - ps.precision_bits();
  for (std::uint64_t cell = 0; cell < cells; ++cell) {
    std::vector<std::uint64_t> c(static_cast<std::size_t>(d));
    std::uint64_t rest = cell;
    for (int k = d - 1; k >= 0; --k) {
      c[static_cast<std::size_t>(k)] = rest % side;
      rest /= side;
    }
    long count = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      bool below = true;
      for (int k = 0; k < d && below; ++k) below = (ps.scaled(i, k) << shift) <= c[static_cast<std::size_t>(k)];
      count += below ? 1 : 0;
    }
    mpq_class vol = static_cast<unsigned long>(ps.size());
    for (int k = 0; k < d; ++k) {
      mpq_class mid(static_cast<unsigned long>(2 * c[static_cast<std::size_t>(k)] + 1), 1);
      vol *= mid * pow2q(level + 1);
    }
    out[cell] = mpq_class(count) - vol;
  }
  return out;
}

mpq_class coefficient_by_grid(const PointSet& ps, const DyadicIndex& index, int bits) {
  const auto avg = cell_averages(ps, bits);
  const int d = ps.dimension();
  mpq_class total = 0;
  for_support_cells(index, bits, [&](const std::vector<std::uint64_t>& c) {
    std::uint64_t cell = 0;
    for (int k = 0; k < d; ++k) cell = (cell << bits) | c[static_cast<std::size_t>(k)];
    total += cell_sign(index, c, bits) * avg[cell];
  });
  return total * pow2q(bits * d);
}

// ---- discrepancy ----

mpq_class discrepancy_at(const PointSet& ps, const std::vector<mpq_class>& x) {
  const int d = ps.dimension();
  long count = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    bool inside = true;
    for (int k = 0; k < d && inside; ++k) inside = coord_q(ps, i, k) < x[static_cast<std::size_t>(k)];
    count += inside ? 1 : 0;
  }
  mpq_class vol = static_cast<unsigned long>(ps.size());
  for (const auto& v : x) vol *= v;
  return mpq_class(count) - vol;
}

namespace {

std::vector<std::vector<mpq_class>> critical_grid(const PointSet& ps, bool with_zero) {
  std::vector<std::vector<mpq_class>> grid(static_cast<std::size_t>(ps.dimension()));
  for (int k = 0; k < ps.dimension(); ++k) {
    std::set<mpq_class> s;
    if (with_zero) s.insert(mpq_class(0));
    for (std::size_t i = 0; i < ps.size(); ++i) s.insert(coord_q(ps, i, k));
    s.insert(mpq_class(1));
    grid[static_cast<std::size_t>(k)].assign(s.begin(), s.end());
  }
  return grid;
}

template <class F>
void for_grid(const std::vector<std::size_t>& sizes, F&& f) {
  std::vector<std::size_t> idx(sizes.size(), 0);
  for (auto s : sizes)
    if (s == 0) return;
  while (true) {
    f(idx);
    std::size_t k = sizes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < sizes[k]) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

}  // namespace

mpq_class star_by_corners(const PointSet& ps) {
  const int d = ps.dimension();
  const auto grid = critical_grid(ps, false);
  std::vector<std::size_t> sizes;
  for (const auto& g : grid) sizes.push_back(g.size());
  mpq_class best = 0;
  for_grid(sizes, [&](const std::vector<std::size_t>& idx) {
    long open = 0, closed = 0;
    mpq_class vol = static_cast<unsigned long>(ps.size());
    for (int k = 0; k < d; ++k) vol *= grid[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      bool lt = true, le = true;
      for (int k = 0; k < d; ++k) {
        const mpq_class z = coord_q(ps, i, k);
        const mpq_class& x = grid[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
        lt = lt && z < x;
        le = le && z <= x;
      }
      open += lt ? 1 : 0;
      closed += le ? 1 : 0;
    }
    const mpq_class below = vol - open, above = closed - vol;
    if (below > best) best = below;
    if (above > best) best = above;
  });
  return best;
}

mpq_class lp_power_by_cells(const PointSet& ps, int p) {
  const int d = ps.dimension();
  const auto grid = critical_grid(ps, true);
  std::vector<std::size_t> sizes;
  for (const auto& g : grid) sizes.push_back(g.size() - 1);
  mpz_class binom;
  const mpq_class n = static_cast<unsigned long>(ps.size());
  mpq_class total = 0;
  for_grid(sizes, [&](const std::vector<std::size_t>& idx) {
    long count = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      bool below = true;
      for (int k = 0; k < d && below; ++k) below = coord_q(ps, i, k) <= grid[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
      count += below ? 1 : 0;
    }
    for (int r = 0; r <= p; ++r) {
      mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(r));
      mpq_class term = mpq_class(binom) * qpow(mpq_class(count), p - r) * qpow(-n, r);
      for (int k = 0; k < d; ++k) {
        const auto& g = grid[static_cast<std::size_t>(k)];
        const std::size_t c = idx[static_cast<std::size_t>(k)];
        term *= (qpow(g[c + 1], r + 1) - qpow(g[c], r + 1)) / (r + 1);
      }
      total += term;
    }
  });
  return total;
}

mpq_class l2_squared_pairs(const PointSet& ps) {
  const int d = ps.dimension();
  const mpq_class n = static_cast<unsigned long>(ps.size());
  mpq_class pairs = 0, single = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t q = 0; q < ps.size(); ++q) {
      mpq_class term = 1;
      for (int k = 0; k < d; ++k) term *= 1 - std::max(coord_q(ps, i, k), coord_q(ps, q, k));
      pairs += term;
    }
    mpq_class term = 1;
    for (int k = 0; k < d; ++k) {
      const mpq_class z = coord_q(ps, i, k);
      term *= (1 - z * z) / 2;
    }
    single += term;
  }
  mpq_class third = n * n;
  for (int k = 0; k < d; ++k) third /= 3;
  return pairs - 2 * n * single + third;
}

// ---- Haar expansions ----

std::vector<double> square_function_by_sum(const PointSet& ps, const std::vector<disclab::Shape>& shapes, int level) {
  const int d = ps.dimension();
  int bits = std::max(level, ps.precision_bits());
  for (const auto& j : shapes)
    for (int v : j) bits = std::max(bits, v + 1);
  const auto avg = cell_averages(ps, bits);
  const std::uint64_t side = std::uint64_t{1} << bits;
  std::vector<mpq_class> sq(avg.size());
  const mpq_class cell_vol = pow2q(bits * d);
  for (const auto& j : shapes) {
    // coefficient per box of shape j, then spread 2^{2|j|} coeff^2 to cells
    int ord = 0;
    for (int v : j) ord += std::max(v, 0);
    std::map<std::vector<std::uint64_t>, mpq_class> coeff;
    std::vector<std::uint64_t> c(static_cast<std::size_t>(d)), m(static_cast<std::size_t>(d));
    auto decode = [&](std::uint64_t cell) {
      for (int k = d - 1; k >= 0; --k) {
        c[static_cast<std::size_t>(k)] = cell % side;
        cell /= side;
      }
      int s = 1;
      for (int k = 0; k < d; ++k) {
        const int jk = j[static_cast<std::size_t>(k)];
        m[static_cast<std::size_t>(k)] = jk < 0 ? 0 : c[static_cast<std::size_t>(k)] >> (bits - jk);
        s *= haar_sign_1d(jk, m[static_cast<std::size_t>(k)], c[static_cast<std::size_t>(k)], bits);
      }
      return s;
    };
    for (std::uint64_t cell = 0; cell < avg.size(); ++cell) {
      const int s = decode(cell);
      coeff[m] += s * avg[cell] * cell_vol;
    }
    const mpq_class w = qpow(mpq_class(4), ord);
    for (std::uint64_t cell = 0; cell < avg.size(); ++cell) {
      decode(cell);
      const mpq_class& a = coeff[m];
      sq[cell] += w * a * a;
    }
  }
  // Report on the requested grid; cells of the finer grid within one cell of
  // the requested grid share the value.
  const std::uint64_t out_side = std::uint64_t{1} << level;
  std::uint64_t out_cells = 1;
  for (int k = 0; k < d; ++k) out_cells *= out_side;
  std::vector<double> out(out_cells);
  for (std::uint64_t cell = 0; cell < out_cells; ++cell) {
    std::uint64_t rest = cell, fine = 0;
    std::vector<std::uint64_t> c(static_cast<std::size_t>(d));
    for (int k = d - 1; k >= 0; --k) {
      c[static_cast<std::size_t>(k)] = rest % out_side;
      rest /= out_side;
    }
    for (int k = 0; k < d; ++k) fine = fine * side + (c[static_cast<std::size_t>(k)] << (bits - level));
    out[cell] = std::sqrt(sq[fine].get_d());
  }
  return out;
}

std::vector<std::uint64_t> empty_boxes_by_scan(const PointSet& ps, int n) {
  const int d = ps.dimension(), p = ps.precision_bits();
  std::vector<std::vector<int>> shapes;
  std::vector<int> cur;
  all_shapes(d, n, cur, shapes);
  std::vector<std::uint64_t> out;
  for (const auto& j : shapes) {
    std::set<std::vector<std::uint64_t>> occupied;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      std::vector<std::uint64_t> m(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) {
        const int jk = j[static_cast<std::size_t>(k)];
        m[static_cast<std::size_t>(k)] = jk <= p ? ps.scaled(i, k) >> (p - jk) : ps.scaled(i, k) << (jk - p);
      }
      occupied.insert(m);
    }
    out.push_back((std::uint64_t{1} << n) - occupied.size());
  }
  return out;
}

// ---- point sets ----

PointSet random_points(int d, int precision, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> coords(n * static_cast<std::size_t>(d));
  const std::uint64_t mask = (std::uint64_t{1} << precision) - 1;
  for (auto& c : coords) c = rng() & mask;
  return PointSet(d, precision, coords);
}

PointSet clustered_points(int d, int precision, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint64_t> coords(n * static_cast<std::size_t>(d));
  const double scale = std::ldexp(1.0, precision);
  for (auto& c : coords) {
    const double x = std::pow(u(rng), 4.0);
    c = std::min(static_cast<std::uint64_t>(x * scale), (std::uint64_t{1} << precision) - 1);
  }
  return PointSet(d, precision, coords);
}

}  // namespace oracle
