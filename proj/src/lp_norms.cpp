#include <algorithm>
#include <cmath>
#include <numeric>

#include "disclab/errors.hpp"
#include "disclab/norms.hpp"
#include "disclab/parallel.hpp"

namespace disclab {

namespace {

mpz_class pow2z(unsigned long k) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), k);
  return r;
}

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(q), 0.0);
  weights.assign(static_cast<std::size_t>(q), 0.0);
  const long double pi = 3.141592653589793238462643383279502884L;
  for (int i = 0; i < q; ++i) {
    long double x = std::cos(pi * (i + 0.75L) / (q + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) p0 = 1;
      dp = q * (x * p1 - p0) / (x * x - 1);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1);
    }
    nodes[static_cast<std::size_t>(i)] = static_cast<double>(x);
    weights[static_cast<std::size_t>(i)] = static_cast<double>(2 / ((1 - x * x) * dp * dp));
  }
}

double ipow(double x, int e) {
  double r = 1;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

// Integral of (c - K t)^p over [sa, sb], K >= 0, p even.
double segment_integral(double c, double k, double sa, double sb, int p) {
  const double delta = sb - sa;
  if (delta <= 0) return 0;
  const double ya = c - k * sa, yb = c - k * sb;
  if (k * delta == 0 || ya == yb) return delta * ipow(ya, p);
  const double big = std::max(std::fabs(ya), std::fabs(yb));
  const double small = std::min(std::fabs(ya), std::fabs(yb));
  if (ya * yb > 0 && small > 0.5 * big) {
    // Sum of ya^r yb^{p-r}; all terms share a sign.
    const double rho = ya / yb;
    double acc = 1;
    for (int r = 0; r < p; ++r) acc = acc * rho + 1;
    return delta * ipow(yb, p) * acc / (p + 1);
  }
  return (ipow(ya, p + 1) - ipow(yb, p + 1)) / ((p + 1) * k);
}

// Cells of the first d-1 coordinates on which the set of points below the
// cell is constant; calls leaf(lower, upper, sorted last coordinates).
class CellWalker {
 public:
  explicit CellWalker(const PointSet& ps) : ps_(ps), d_(ps.dimension()), p_(ps.precision_bits()) {
    const std::uint64_t one = std::uint64_t{1} << p_;
    grid_.resize(static_cast<std::size_t>(std::max(d_ - 1, 0)));
    for (int k = 0; k + 1 < d_; ++k) {
      auto& g = grid_[static_cast<std::size_t>(k)];
      g.push_back(0);
      for (std::size_t i = 0; i < ps.size(); ++i) g.push_back(ps.scaled(i, k));
      g.push_back(one);
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    order_.resize(ps.size());
    std::iota(order_.begin(), order_.end(), 0U);
    const int last = d_ - 1;
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return ps.scaled(a, last) < ps.scaled(b, last); });
  }

  double cell_count() const {
    double c = 1;
    for (const auto& g : grid_) c *= static_cast<double>(g.size() - 1);
    return c;
  }

  // Leaf receives lower/upper scaled bounds of the first d-1 coordinates and
  // the scaled last coordinates of the qualifying points, ascending.
  template <class Leaf>
  void walk_top(std::size_t top, Leaf&& leaf) const {
    std::vector<std::uint64_t> lo(static_cast<std::size_t>(d_ - 1)), hi(lo.size());
    if (d_ == 1) {
      std::vector<std::uint64_t> last;
      for (auto i : order_) last.push_back(ps_.scaled(i, 0));
      leaf(lo, hi, last);
      return;
    }
    std::vector<std::uint32_t> q;
    const auto& g = grid_[0];
    for (auto i : order_)
      if (ps_.scaled(i, 0) <= g[top]) q.push_back(i);
    lo[0] = g[top];
    hi[0] = g[top + 1];
    descend(1, q, lo, hi, leaf);
  }

  std::size_t top_cells() const { return d_ == 1 ? 1 : grid_[0].size() - 1; }
  int dimension() const { return d_; }
  int precision() const { return p_; }

 private:
  template <class Leaf>
  void descend(int k, const std::vector<std::uint32_t>& q, std::vector<std::uint64_t>& lo, std::vector<std::uint64_t>& hi,
               Leaf& leaf) const {
    if (k == d_ - 1) {
      std::vector<std::uint64_t> last;
      last.reserve(q.size());
      for (auto i : q) last.push_back(ps_.scaled(i, d_ - 1));
      leaf(lo, hi, last);
      return;
    }
    const auto& g = grid_[static_cast<std::size_t>(k)];
    std::vector<std::uint32_t> sub;
    for (std::size_t c = 0; c + 1 < g.size(); ++c) {
      sub.clear();
      for (auto i : q)
        if (ps_.scaled(i, k) <= g[c]) sub.push_back(i);
      lo[static_cast<std::size_t>(k)] = g[c];
      hi[static_cast<std::size_t>(k)] = g[c + 1];
      descend(k + 1, sub, lo, hi, leaf);
    }
  }

  const PointSet& ps_;
  int d_;
  int p_;
  std::vector<std::vector<std::uint64_t>> grid_;
  std::vector<std::uint32_t> order_;
};

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

double checked_cells(const PointSet& ps, double budget) {
  const double cells = std::pow(static_cast<double>(ps.size() + 1), ps.dimension());
  if (cells > budget) throw ResourceError("lp_norm_exact: (N+1)^d exceeds budget");
  return cells;
}

}  // namespace

mpq_class lp_power_rational(const PointSet& ps, int p, double budget) {
  if (p < 2 || p % 2 != 0) throw DomainError("lp_norm_exact: p must be a positive even integer");
  checked_cells(ps, budget);
  const CellWalker walker(ps);
  const int d = ps.dimension();
  const int bits = ps.precision_bits();
  const mpz_class one = pow2z(static_cast<unsigned long>(bits));

  // T[r] = sum over cells of A_r * prod_k (b_k^{r+1} - a_k^{r+1}), all scaled.
  std::vector<std::vector<mpz_class>> partial(walker.top_cells(), std::vector<mpz_class>(static_cast<std::size_t>(p + 1)));
  parallel_for(walker.top_cells(), [&](std::size_t top) {
    auto& acc = partial[top];
    mpz_class a_r, cell, pa, pb, cpow, term;
    walker.walk_top(top, [&](const std::vector<std::uint64_t>& lo, const std::vector<std::uint64_t>& hi,
                             const std::vector<std::uint64_t>& last) {
      const std::size_t segments = last.size() + 1;
      for (int r = 0; r <= p; ++r) {
        a_r = 0;
        for (std::size_t i = 0; i < segments; ++i) {
          const mpz_class sa = i == 0 ? mpz_class(0) : mpz_class(static_cast<unsigned long>(last[i - 1]));
          const mpz_class sb = i == last.size() ? one : mpz_class(static_cast<unsigned long>(last[i]));
          if (sa == sb) continue;
          mpz_pow_ui(pa.get_mpz_t(), sa.get_mpz_t(), static_cast<unsigned long>(r + 1));
          mpz_pow_ui(pb.get_mpz_t(), sb.get_mpz_t(), static_cast<unsigned long>(r + 1));
          mpz_ui_pow_ui(cpow.get_mpz_t(), static_cast<unsigned long>(i), static_cast<unsigned long>(p - r));
          a_r += cpow * (pb - pa);
        }
        cell = a_r;
        for (std::size_t k = 0; k < lo.size(); ++k) {
          mpz_ui_pow_ui(pa.get_mpz_t(), static_cast<unsigned long>(lo[k]), static_cast<unsigned long>(r + 1));
          mpz_ui_pow_ui(pb.get_mpz_t(), static_cast<unsigned long>(hi[k]), static_cast<unsigned long>(r + 1));
          cell *= pb - pa;
        }
        acc[static_cast<std::size_t>(r)] += cell;
      }
    });
  });

  mpq_class total = 0;
  mpz_class binom, n_pow, denom_pow;
  const unsigned long n = ps.size();
  for (int r = 0; r <= p; ++r) {
    mpz_class t = 0;
    for (const auto& part : partial) t += part[static_cast<std::size_t>(r)];
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(r));
    mpz_ui_pow_ui(n_pow.get_mpz_t(), n, static_cast<unsigned long>(r));
    mpz_ui_pow_ui(denom_pow.get_mpz_t(), static_cast<unsigned long>(r + 1), static_cast<unsigned long>(d));
    mpq_class term(binom * n_pow * t, denom_pow * pow2z(static_cast<unsigned long>(bits) * static_cast<unsigned long>(r + 1) *
                                                          static_cast<unsigned long>(d)));
    term.canonicalize();
    if (r % 2 == 0)
      total += term;
    else
      total -= term;
  }
  return total;
}

NormReport lp_norm_exact(const PointSet& ps, int p, const LpOptions& opts) {
  if (p < 2 || p % 2 != 0) throw DomainError("lp_norm_exact: p must be a positive even integer (use lp_norm_estimate)");
  if (ps.empty()) throw DomainError("lp_norm_exact: need at least one point");
  const double cells = checked_cells(ps, opts.budget);
  bool rational = opts.engine == LpOptions::Engine::Rational;
  if (opts.engine == LpOptions::Engine::Auto) rational = cells * p <= opts.rational_limit;

  NormReport r;
  r.method = NormMethod::ExactCell;
  r.params = {{"N", ps.size()}, {"d", ps.dimension()}, {"p", p}, {"engine", rational ? "rational" : "quadrature"}};
  if (rational) {
    const mpq_class v = lp_power_rational(ps, p, opts.budget);
    r.value = std::pow(v.get_d(), 1.0 / p);
    return r;
  }

  const CellWalker walker(ps);
  const double scale = std::ldexp(1.0, -ps.precision_bits());
  const double n = static_cast<double>(ps.size());
  const int q = (p + 2) / 2;  // exact for degree p in each cell coordinate
  std::vector<double> gx, gw;
  gauss_legendre(q, gx, gw);

  std::vector<double> partial(walker.top_cells(), 0.0);
  parallel_for(walker.top_cells(), [&](std::size_t top) {
    double acc = 0;
    std::vector<double> ks, ws, nk, nw, s;
    walker.walk_top(top, [&](const std::vector<std::uint64_t>& lo, const std::vector<std::uint64_t>& hi,
                             const std::vector<std::uint64_t>& last) {
      // Tensor nodes: K = N * prod x_k and the product weight.
      ks.assign(1, n);
      ws.assign(1, 1.0);
      for (std::size_t k = 0; k < lo.size(); ++k) {
        const double a = static_cast<double>(lo[k]) * scale, b = static_cast<double>(hi[k]) * scale;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        nk.clear();
        nw.clear();
        for (std::size_t i = 0; i < ks.size(); ++i)
          for (int t = 0; t < q; ++t) {
            nk.push_back(ks[i] * (mid + half * gx[static_cast<std::size_t>(t)]));
            nw.push_back(ws[i] * half * gw[static_cast<std::size_t>(t)]);
          }
        ks.swap(nk);
        ws.swap(nw);
      }
      s.assign(1, 0.0);
      for (auto z : last) s.push_back(static_cast<double>(z) * scale);
      s.push_back(1.0);
      for (std::size_t i = 0; i < ks.size(); ++i) {
        double f = 0;
        for (std::size_t seg = 0; seg + 1 < s.size(); ++seg)
          f += segment_integral(static_cast<double>(seg), ks[i], s[seg], s[seg + 1], p);
        acc += ws[i] * f;
      }
    });
    partial[top] = acc;
  });
  double total = 0;
  for (double v : partial) total += v;
  r.value = std::pow(total, 1.0 / p);
  return r;
}

PointFunction discrepancy_function(const PointSet& ps) {
  return [&ps](std::span<const double> x) {
    const int d = ps.dimension();
    double vol = static_cast<double>(ps.size());
    for (int k = 0; k < d; ++k) vol *= x[static_cast<std::size_t>(k)];
    std::size_t count = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      bool inside = true;
      for (int k = 0; k < d && inside; ++k) inside = ps.coordinate_double(i, k) < x[static_cast<std::size_t>(k)];
      count += inside ? 1 : 0;
    }
    return std::fabs(static_cast<double>(count) - vol);
  };
}

StratifiedSample stratified_sample(int d, const PointFunction& f, const SampleOptions& opts) {
  if (d < 1) throw DomainError("stratified_sample: dimension must be positive");
  const double per_dim = std::floor(std::pow(std::max<double>(1.0, static_cast<double>(opts.samples) / 2.0), 1.0 / d) + 1e-9);
  const std::uint64_t g = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(per_dim));
  std::uint64_t strata = 1;
  for (int k = 0; k < d; ++k) strata *= g;
  StratifiedSample out;
  out.d = d;
  out.strata = static_cast<std::size_t>(strata);
  out.first.assign(out.strata, 0.0);
  out.second.assign(out.strata, 0.0);
  const double width = 1.0 / static_cast<double>(g);
  parallel_for(out.strata, [&](std::size_t s) {
    std::uint64_t key = opts.seed ^ (0xd1b54a32d192ed03ULL * (static_cast<std::uint64_t>(s) + 1));
    std::uint64_t state = splitmix64(key);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int rep = 0; rep < 2; ++rep) {
      std::uint64_t cell = s;
      for (int k = d - 1; k >= 0; --k) {
        const double lower = static_cast<double>(cell % g) * width;
        cell /= g;
        x[static_cast<std::size_t>(k)] = std::min(lower + uniform01(state) * width, std::nextafter(1.0, 0.0));
      }
      (rep == 0 ? out.first : out.second)[s] = std::fabs(f(x));
    }
  });
  return out;
}

NormReport lp_norm_estimate(int d, const PointFunction& f, double p, const SampleOptions& opts) {
  if (!(p >= 1)) throw DomainError("lp_norm_estimate: p must be at least 1");
  const StratifiedSample smp = stratified_sample(d, f, opts);
  long double mean = 0, var = 0;
  for (std::size_t s = 0; s < smp.strata; ++s) {
    const long double a = std::pow(static_cast<long double>(smp.first[s]), p);
    const long double b = std::pow(static_cast<long double>(smp.second[s]), p);
    mean += (a + b) / 2;
    var += (a - b) * (a - b) / 4;
  }
  const long double strata = static_cast<long double>(smp.strata);
  mean /= strata;
  const long double se = std::sqrt(var) / strata;
  NormReport r;
  r.method = NormMethod::MonteCarlo;
  r.value = static_cast<double>(std::pow(mean, 1.0L / p));
  r.error_bound = mean > 0 ? static_cast<double>(r.value / p * se / mean) : 0.0;
  r.params = {{"p", p}, {"samples", 2 * smp.strata}, {"seed", opts.seed}, {"d", d}};
  return r;
}

NormReport lp_norm_estimate(const PointSet& ps, double p, const SampleOptions& opts) {
  NormReport r = lp_norm_estimate(ps.dimension(), discrepancy_function(ps), p, opts);
  r.params["N"] = ps.size();
  return r;
}

}  // namespace disclab
