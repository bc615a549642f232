#include "disclab/discrepancy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <type_traits>

#include "disclab/errors.hpp"
#include "disclab/parallel.hpp"

namespace disclab {

namespace {

int bit_length(std::uint64_t v) { return 64 - std::countl_zero(v); }

mpz_class pow2z(unsigned k) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), k);
  return r;
}

// Coordinates at the coarsest exact precision; keeps the integer widths small.
struct Reduced {
  int d;
  int p;
  std::size_t n;
  std::vector<std::uint64_t> z;
  std::uint64_t at(std::size_t i, int k) const { return z[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)]; }
};

Reduced reduce(const PointSet& ps) {
  const int p = ps.minimal_precision();
  const int shift = ps.precision_bits() - p;
  Reduced r{ps.dimension(), p, ps.size(), {}};
  r.z.reserve(ps.scaled_coordinates().size());
  for (auto c : ps.scaled_coordinates()) r.z.push_back(c >> shift);
  return r;
}

// Exact integers of type T hold values scaled by 2^(p*d).
template <class T>
class StarSearch {
 public:
  explicit StarSearch(const Reduced& pts) : pts_(pts), grid_(static_cast<std::size_t>(pts.d)) {
    const std::uint64_t one = std::uint64_t{1} << pts.p;
    for (int k = 0; k < pts.d; ++k) {
      auto& g = grid_[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < pts.n; ++i) g.push_back(pts.at(i, k));
      g.push_back(one);
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    unit_ = 1;
    for (int k = 0; k < pts.d; ++k) unit_ *= num(one);
    count_ = num(pts.n);
  }

  T run() const {
    std::vector<std::uint32_t> all(pts_.n);
    std::iota(all.begin(), all.end(), 0U);
    const int last = pts_.d - 1;
    std::stable_sort(all.begin(), all.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return pts_.at(a, last) < pts_.at(b, last); });
    if (pts_.d == 1) return sweep(T(1), all, all);

    const auto& g0 = grid_[0];
    std::vector<T> best(g0.size(), T(0));
    parallel_for(g0.size(), [&](std::size_t gi) {
      std::vector<std::uint32_t> open, closed;
      filter(all, all, 0, g0[gi], open, closed);
      best[gi] = descend(1, num(g0[gi]), open, closed);
    });
    return *std::max_element(best.begin(), best.end());
  }

 private:
  static T num(std::uint64_t v) {
    if constexpr (std::is_same_v<T, mpz_class>)
      return mpz_class(static_cast<unsigned long>(v));
    else
      return static_cast<T>(v);
  }

  void filter(const std::vector<std::uint32_t>& open, const std::vector<std::uint32_t>& closed, int k,
              std::uint64_t g, std::vector<std::uint32_t>& open_out, std::vector<std::uint32_t>& closed_out) const {
    open_out.clear();
    closed_out.clear();
    for (auto i : open)
      if (pts_.at(i, k) < g) open_out.push_back(i);
    for (auto i : closed)
      if (pts_.at(i, k) <= g) closed_out.push_back(i);
  }

  T descend(int k, const T& prefix, const std::vector<std::uint32_t>& open,
            const std::vector<std::uint32_t>& closed) const {
    if (k == pts_.d - 1) return sweep(prefix, open, closed);
    T best(0);
    std::vector<std::uint32_t> o, c;
    for (auto g : grid_[static_cast<std::size_t>(k)]) {
      filter(open, closed, k, g, o, c);
      const T v = descend(k + 1, T(prefix * num(g)), o, c);
      if (v > best) best = v;
    }
    return best;
  }

  // Last coordinate: both lists are sorted by it, so one pass over the grid.
  T sweep(const T& prefix, const std::vector<std::uint32_t>& open, const std::vector<std::uint32_t>& closed) const {
    const int k = pts_.d - 1;
    std::size_t a = 0, b = 0;
    T best(0), linear, v;
    for (auto g : grid_[static_cast<std::size_t>(k)]) {
      while (a < open.size() && pts_.at(open[a], k) < g) ++a;
      while (b < closed.size() && pts_.at(closed[b], k) <= g) ++b;
      linear = count_ * prefix * num(g);
      v = linear - num(a) * unit_;
      if (v > best) best = v;
      v = num(b) * unit_ - linear;
      if (v > best) best = v;
    }
    return best;
  }

  const Reduced& pts_;
  std::vector<std::vector<std::uint64_t>> grid_;
  T unit_;
  T count_;
};

}  // namespace

DiscrepancyValue local_discrepancy(const PointSet& ps, std::span<const DyadicRational> x) {
  const int d = ps.dimension();
  if (x.size() != static_cast<std::size_t>(d)) throw DomainError("local_discrepancy: dimension mismatch");
  const unsigned p = static_cast<unsigned>(ps.precision_bits());
  std::vector<std::uint64_t> threshold(static_cast<std::size_t>(d));
  DyadicRational volume(1);
  for (int k = 0; k < d; ++k) {
    const auto& xk = x[static_cast<std::size_t>(k)];
    if (xk.sign() < 0 || DyadicRational(1) < xk) throw DomainError("local_discrepancy: x outside [0,1]^d");
    volume *= xk;
    // z < x  <=>  z_scaled < ceil(x * 2^p)
    mpz_class t;
    if (xk.exponent() <= p) {
      t = xk.scaled_numerator(p);
    } else {
      mpz_cdiv_q_2exp(t.get_mpz_t(), xk.numerator().get_mpz_t(), xk.exponent() - p);
    }
    threshold[static_cast<std::size_t>(k)] = t.get_ui();
  }
  DiscrepancyValue out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    bool inside = true;
    for (int k = 0; k < d && inside; ++k) inside = ps.scaled(i, k) < threshold[static_cast<std::size_t>(k)];
    if (inside) ++out.counting;
  }
  out.linear = DyadicRational(static_cast<long>(ps.size())) * volume;
  return out;
}

DyadicRational star_discrepancy_exact(const PointSet& ps, const StarOptions& opts) {
  const double n = static_cast<double>(ps.size());
  const double work = n * std::pow(n + 2.0, ps.dimension());
  if (work > opts.budget)
    throw ResourceError("star_discrepancy: N*(N+2)^d = " + std::to_string(work) + " exceeds budget");
  if (ps.empty()) return DyadicRational(0);
  const Reduced pts = reduce(ps);
  const auto exponent = static_cast<unsigned>(pts.p * pts.d);
  if (pts.p * pts.d + bit_length(pts.n) + 2 <= 126)
    return DyadicRational::from_int128(StarSearch<Int128>(pts).run(), exponent);
  return DyadicRational(StarSearch<mpz_class>(pts).run(), exponent);
}

NormReport star_discrepancy(const PointSet& ps, const StarOptions& opts) {
  const DyadicRational v = star_discrepancy_exact(ps, opts);
  NormReport r;
  r.value = v.to_double();
  r.method = NormMethod::ExactGrid;
  r.params = {{"N", ps.size()}, {"d", ps.dimension()}, {"exact", v.to_string()}};
  return r;
}

mpq_class l2_squared_warnock(const PointSet& ps) {
  if (ps.empty()) throw DomainError("l2_warnock: need at least one point");
  const Reduced pts = reduce(ps);
  const int d = pts.d;
  const unsigned pd = static_cast<unsigned>(pts.p * d);
  const std::uint64_t one = std::uint64_t{1} << pts.p;

  // Pair sum scaled by 2^(p*d); each row accumulates in 128 bits when it fits.
  std::vector<mpz_class> rows(pts.n);
  const bool narrow = pts.p * d + bit_length(2 * pts.n) + 1 <= 126;
  parallel_for(pts.n, [&](std::size_t i) {
    if (narrow) {
      Int128 acc = 0;
      for (std::size_t q = i; q < pts.n; ++q) {
        Int128 term = q == i ? 1 : 2;
        for (int k = 0; k < d; ++k) term *= static_cast<Int128>(one - std::max(pts.at(i, k), pts.at(q, k)));
        acc += term;
      }
      rows[i] = to_mpz(acc);
    } else {
      mpz_class acc = 0, term;
      for (std::size_t q = i; q < pts.n; ++q) {
        term = q == i ? 1 : 2;
        for (int k = 0; k < d; ++k) term *= static_cast<unsigned long>(one - std::max(pts.at(i, k), pts.at(q, k)));
        acc += term;
      }
      rows[i] = acc;
    }
  });
  mpz_class pair = 0;
  for (const auto& r : rows) pair += r;

  // Sum of prod(1 - z_k^2), scaled by 2^(2*p*d).
  mpz_class single = 0, term, sq;
  const mpz_class one_sq = pow2z(static_cast<unsigned>(2 * pts.p));
  for (std::size_t i = 0; i < pts.n; ++i) {
    term = 1;
    for (int k = 0; k < d; ++k) {
      sq = pts.at(i, k);
      sq *= sq;
      term *= one_sq - sq;
    }
    single += term;
  }

  const mpz_class n = static_cast<unsigned long>(pts.n);
  mpq_class result(pair, pow2z(pd));
  mpq_class second(n * single, pow2z(2 * pd + static_cast<unsigned>(d - 1)));
  result.canonicalize();
  second.canonicalize();
  mpz_class three_d = 1;
  mpz_pow_ui(three_d.get_mpz_t(), mpz_class(3).get_mpz_t(), static_cast<unsigned long>(d));
  mpq_class third(n * n, three_d);
  third.canonicalize();
  result -= second;
  result += third;
  result.canonicalize();
  return result;
}

NormReport l2_warnock(const PointSet& ps) {
  const mpq_class sq = l2_squared_warnock(ps);
  NormReport r;
  r.value = std::sqrt(sq.get_d());
  r.method = NormMethod::Warnock;
  r.params = {{"N", ps.size()}, {"d", ps.dimension()}, {"squared", sq.get_str()}};
  return r;
}

}  // namespace disclab
