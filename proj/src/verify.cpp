#include "disclab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "disclab/discrepancy.hpp"
#include "disclab/errors.hpp"
#include "disclab/gf2net.hpp"
#include "disclab/norms.hpp"
#include "disclab/parallel.hpp"

namespace disclab {

namespace {

mpz_class pow2z(unsigned long k) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), k);
  return r;
}

bool nonnegative(const Shape& j) {
  return std::all_of(j.begin(), j.end(), [](int v) { return v >= 0; });
}

int half_up(int t) { return (t + 1) / 2; }

}  // namespace

// ---- empty boxes ------------------------------------------------------------------

int empty_box_scale(std::size_t n_points) {
  int n = 0;
  while ((std::uint64_t{1} << n) < 2 * static_cast<std::uint64_t>(std::max<std::size_t>(n_points, 1))) ++n;
  return n;
}

nlohmann::json EmptyBoxReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : shapes) rows.push_back({{"j", s.j}, {"empty", s.empty}, {"total", s.total}});
  return {{"n", n}, {"N", points}, {"pass", pass}, {"shapes", rows},
          {"bound_squared", bound_squared.to_string()}, {"bound", bound}};
}

EmptyBoxReport check_empty_boxes(const PointSet& ps) {
  EmptyBoxReport r;
  r.points = ps.size();
  r.n = empty_box_scale(ps.size());
  if (r.n > 62) throw ResourceError("check_empty_boxes: too many points");
  const int d = ps.dimension();
  const auto shapes = enumerate_shapes(d, r.n);
  r.shapes.resize(shapes.size());
  parallel_for(shapes.size(), [&](std::size_t s) {
    std::vector<std::uint64_t> keys;
    keys.reserve(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) keys.push_back(pack_position(shapes[s], box_position(ps, i, shapes[s])));
    std::sort(keys.begin(), keys.end());
    const auto occupied = static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
    auto& row = r.shapes[s];
    row.j = shapes[s];
    row.total = std::uint64_t{1} << r.n;
    row.empty = row.total - occupied;
  });
  std::uint64_t empty_total = 0;
  for (const auto& s : r.shapes) {
    if (s.empty < (std::uint64_t{1} << (r.n - 1))) r.pass = false;
    empty_total += s.empty;
  }
  // coeff_linear^2 = N^2 2^{-4n-4d} on every shape of order n.
  const mpz_class n_sq = mpz_class(static_cast<unsigned long>(ps.size())) * static_cast<unsigned long>(ps.size());
  r.bound_squared = DyadicRational(n_sq * static_cast<unsigned long>(empty_total), static_cast<unsigned>(3 * r.n + 4 * d));
  r.bound = std::sqrt(r.bound_squared.to_double());
  return r;
}

NormReport bmo_lower_bound(const PointSet& ps) {
  const EmptyBoxReport e = check_empty_boxes(ps);
  NormReport r;
  r.method = NormMethod::ClosedForm;
  r.value = e.bound;
  r.params = {{"n", e.n}, {"N", ps.size()}, {"d", ps.dimension()}, {"squared", e.bound_squared.to_string()},
              {"empty_check", e.pass}};
  return r;
}

// ---- regime sums -----------------------------------------------------------------------

nlohmann::json RegimeSums::to_json() const {
  return {{"large", large},
          {"intermediate", intermediate},
          {"small_linear", small_linear},
          {"small_counting", small_counting},
          {"small_cross", small_cross},
          {"total", total}};
}

RegimeSums three_regime_sums(const HaarCoefficientTable& table, int n, int t) {
  if (!table.from_points()) throw DomainError("three_regime_sums: needs a table computed from points");
  if (table.max_level() < std::max(n - 1, table.precision_bits() - 1))
    throw DomainError("three_regime_sums: table truncated too early");
  const int d = table.dimension();
  const int split = n - half_up(t);
  const mpz_class scale = pow2z(table.counting_exponent());
  mpq_class large = 0, mid = 0, small_c = 0, small_x = 0;
  for (const auto& b : table.blocks()) {
    if (!nonnegative(b.j)) continue;
    const int ord = order(b.j);
    mpz_class s1 = 0, s2 = 0, num;
    for (auto c : b.counting) {
      num = to_mpz(c);
      s1 += num;
      s2 += num * num;
    }
    const mpq_class lin = coeff_linear(b.j, table.point_count()).to_mpq();
    const mpq_class w(pow2z(static_cast<unsigned long>(ord)));
    const mpq_class counting = w * make_q(s2, scale * scale);
    const mpq_class cross = -2 * w * lin * make_q(s1, scale);
    if (ord >= n) {
      small_c += counting;
      small_x += cross;
      continue;
    }
    const mpq_class all = counting + cross + w * w * lin * lin;
    (ord < split ? large : mid) += all;
  }
  // Linear part of every |j| >= n in closed form: N^2 2^{-4d} sum_{k>=n} C(k+d-1,d-1) 4^{-k}.
  mpq_class partial = 0, total_series = 1;
  for (int k = 0; k < d; ++k) total_series *= mpq_class(4, 3);
  mpz_class binom;
  for (int k = 0; k < n; ++k) {
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(k + d - 1), static_cast<unsigned long>(d - 1));
    partial += make_q(binom, pow2z(static_cast<unsigned long>(2 * k)));
  }
  const mpz_class nn = mpz_class(static_cast<unsigned long>(table.point_count())) * static_cast<unsigned long>(table.point_count());
  mpq_class small_l = make_q(nn, pow2z(static_cast<unsigned long>(4 * d))) * (total_series - partial);
  small_l.canonicalize();

  RegimeSums r;
  r.large = large.get_d();
  r.intermediate = mid.get_d();
  r.small_linear = small_l.get_d();
  r.small_counting = small_c.get_d();
  r.small_cross = small_x.get_d();
  r.total = mpq_class(large + mid + small_l + small_c + small_x).get_d();
  return r;
}

// ---- coefficient bounds ------------------------------------------------------------------

nlohmann::json CoefficientFit::to_json() const {
  return {{"c1", c1}, {"c2", c2}, {"c3", c3}, {"max_exceptions", max_exceptions}};
}

namespace {

// |coeff| for the stored positions of a block plus the value and multiplicity
// of the linear-only positions.
struct BlockMagnitudes {
  std::vector<long double> stored;
  long double rest = 0;
  std::uint64_t rest_count = 0;
};

BlockMagnitudes magnitudes(const HaarCoefficientTable& table, const HaarCoefficientTable::Block& b) {
  BlockMagnitudes m;
  const long double lin = table.linear_ld(b.j);
  for (auto c : b.counting) m.stored.push_back(std::fabs(table.counting_ld(c) - lin));
  m.rest = std::fabs(lin);
  m.rest_count = (std::uint64_t{1} << order(b.j)) - b.keys.size();
  return m;
}

long double c3_scale(int n, int t, int ord, int d) {
  return std::ldexp(std::pow(static_cast<long double>(2 * n - t - 2 * ord), d - 1), -n);
}

void require_fit_table(const HaarCoefficientTable& table) {
  if (std::any_of(table.blocks().begin(), table.blocks().end(), [](const auto& b) { return order(b.j) > 62; }))
    throw ResourceError("coefficient fit: shape order too large");
}

}  // namespace

CoefficientFit fit_coefficient_bounds(const HaarCoefficientTable& table, int n, int t) {
  require_fit_table(table);
  const int d = table.dimension();
  const int split = n - half_up(t);
  const std::uint64_t allowed = std::uint64_t{1} << n;
  CoefficientFit fit;
  long double c1 = 0, c2 = 0, c3 = 0;
  for (const auto& b : table.blocks()) {
    const int ord = order(b.j);
    const BlockMagnitudes m = magnitudes(table, b);
    long double top = m.rest_count > 0 ? m.rest : 0.0L;
    for (auto v : m.stored) top = std::max(top, v);
    if (ord >= split) {
      c1 = std::max(c1, std::ldexp(top, ord));
      // (allowed+1)-th largest of |coeff| 2^{2|j|-n}.
      std::vector<long double> vals = m.stored;
      std::sort(vals.begin(), vals.end(), std::greater<>());
      const long double unit = std::ldexp(1.0L, 2 * ord - n);
      long double threshold = 0;
      const std::uint64_t total = vals.size() + m.rest_count;
      if (total > allowed) {
        // Merge the stored values with rest_count copies of rest.
        std::uint64_t seen = 0;
        std::size_t i = 0;
        bool rest_used = false;
        for (;;) {
          long double v;
          std::uint64_t mult;
          if (!rest_used && (i >= vals.size() || m.rest >= vals[i])) {
            v = m.rest;
            mult = m.rest_count;
            rest_used = true;
          } else {
            v = vals[i++];
            mult = 1;
          }
          if (mult == 0) continue;
          seen += mult;
          if (seen > allowed) {
            threshold = v;
            break;
          }
        }
      }
      c2 = std::max(c2, threshold * unit);
    } else {
      c3 = std::max(c3, top / c3_scale(n, t, ord, d));
    }
  }
  fit.c1 = static_cast<double>(c1);
  fit.c2 = static_cast<double>(c2);
  fit.c3 = static_cast<double>(c3);
  for (const auto& b : table.blocks()) {
    if (order(b.j) < split) continue;
    const BlockMagnitudes m = magnitudes(table, b);
    const long double limit = static_cast<long double>(fit.c2) * std::ldexp(1.0L, n - 2 * order(b.j));
    std::uint64_t count = m.rest > limit ? m.rest_count : 0;
    for (auto v : m.stored) count += v > limit ? 1 : 0;
    fit.max_exceptions = std::max(fit.max_exceptions, count);
  }
  return fit;
}

std::uint64_t coefficient_bound_violations(const HaarCoefficientTable& table, int n, int t, const CoefficientFit& k) {
  require_fit_table(table);
  const int d = table.dimension();
  const int split = n - half_up(t);
  const std::uint64_t allowed = std::uint64_t{1} << n;
  // Relative slack for rounding in the floating comparison.
  const long double slack = 1 + 1e-12L;
  std::uint64_t violations = 0;
  for (const auto& b : table.blocks()) {
    const int ord = order(b.j);
    const BlockMagnitudes m = magnitudes(table, b);
    auto count_above = [&](long double limit) {
      std::uint64_t c = m.rest > limit * slack ? m.rest_count : 0;
      for (auto v : m.stored) c += v > limit * slack ? 1 : 0;
      return c;
    };
    if (ord >= split) {
      violations += count_above(static_cast<long double>(k.c1) * std::ldexp(1.0L, -ord));
      const std::uint64_t exceptions = count_above(static_cast<long double>(k.c2) * std::ldexp(1.0L, n - 2 * ord));
      if (exceptions > allowed) violations += exceptions - allowed;
    } else {
      violations += count_above(static_cast<long double>(k.c3) * c3_scale(n, t, ord, d));
    }
  }
  return violations;
}

// ---- scaling studies ------------------------------------------------------------------------

StudyNorm parse_study_norm(const std::string& name) {
  if (name == "bmo_proxy" || name == "bmo") return StudyNorm::BmoProxy;
  if (name == "orlicz_proxy" || name == "orlicz") return StudyNorm::OrliczProxy;
  if (name == "star") return StudyNorm::Star;
  if (name == "l2") return StudyNorm::L2;
  if (name == "bmo_lower") return StudyNorm::BmoLower;
  throw DomainError("unknown study norm '" + name + "' (bmo_proxy, orlicz_proxy, star, l2, bmo_lower)");
}

std::string to_string(StudyNorm norm) {
  switch (norm) {
    case StudyNorm::BmoProxy: return "bmo_proxy";
    case StudyNorm::OrliczProxy: return "orlicz_proxy";
    case StudyNorm::Star: return "star";
    case StudyNorm::L2: return "l2";
    case StudyNorm::BmoLower: return "bmo_lower";
  }
  return "unknown";
}

PowerFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DomainError("fit_power_law: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0) || !(y > 0)) throw DomainError("fit_power_law: values must be positive");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  PowerFit f;
  const double denom = m * sxx - sx * sx;
  if (denom == 0) throw DomainError("fit_power_law: need distinct abscissae");
  f.exponent = (m * sxy - sx * sy) / denom;
  f.intercept = (sy - f.exponent * sx) / m;
  double ss = 0;
  for (const auto& [x, y] : points) {
    const double e = std::log(y) - f.intercept - f.exponent * std::log(x);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / m);
  return f;
}

nlohmann::json ScalingStudy::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) rows_json.push_back({{"n", r.n}, {"N", r.points}, {"value", r.value}, {"method", r.method}});
  return {{"construction", construction}, {"d", d},           {"sigma", sigma},         {"norm", to_string(norm)},
          {"exponent", exponent},         {"intercept", intercept}, {"residual", residual}, {"rows", rows_json}};
}

ScalingStudy scaling_study(const std::string& construction, int d, int sigma, const std::vector<int>& n_range,
                           StudyNorm norm, const StudyOptions& opts) {
  std::vector<int> ns = n_range;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 4) throw DomainError("scaling_study: need at least 4 distinct n");
  ScalingStudy study;
  study.construction = construction;
  study.d = d;
  study.sigma = sigma;
  study.norm = norm;
  std::vector<std::pair<double, double>> pts;
  for (int n : ns) {
    if (n < 1) throw DomainError("scaling_study: n must be positive");
    const int net_n = norm == StudyNorm::BmoLower ? n - 1 : n;
    const PointSet ps = digital_points(builtin_net(construction, d, net_n, sigma));
    NormReport rep;
    switch (norm) {
      case StudyNorm::L2: rep = l2_warnock(ps); break;
      case StudyNorm::Star: rep = star_discrepancy(ps); break;
      case StudyNorm::BmoLower: rep = bmo_lower_bound(ps); break;
      case StudyNorm::BmoProxy: rep = bmo_proxy(coefficient_table(ps), {opts.order_cap, true}); break;
      case StudyNorm::OrliczProxy: {
        const double alpha = opts.alpha > 0 ? opts.alpha : (d > 1 ? 2.0 / (d - 1) : 2.0);
        rep = orlicz_norm_proxy(ps, alpha);
        break;
      }
    }
    study.rows.push_back({n, ps.size(), rep.value, to_string(rep.method)});
    pts.emplace_back(n, rep.value);
  }
  const PowerFit fit = fit_power_law(pts);
  study.exponent = fit.exponent;
  study.intercept = fit.intercept;
  study.residual = fit.residual;
  return study;
}

// ---- discretization ----------------------------------------------------------------------------

nlohmann::json DiscretizationReport::to_json() const {
  return {{"applicable", applicable}, {"reason", reason},       {"cells", cells},
          {"counting_constant", counting_constant}, {"max_variation", max_variation}, {"bound", bound},
          {"pass", pass},
          {"note", "qualitative check: the counting part is constant on grid cells and the linear part moves by "
                   "at most N d 2^-P"}};
}

DiscretizationReport discretization_consistency(const PointSet& ps, std::size_t cells, std::uint64_t seed) {
  DiscretizationReport r;
  const std::size_t n = ps.size();
  const int p = ps.precision_bits();
  const int d = ps.dimension();
  if (n == 0 || (n & (n - 1)) != 0) {
    r.applicable = false;
    r.reason = "point count is not a power of two";
  } else if (p > 32) {
    r.applicable = false;
    r.reason = "precision above 32 bits; not a binary net at desk scale";
  }
  if (!r.applicable) {
    r.pass = false;
    return r;
  }
  r.bound = static_cast<double>(n) * d * std::ldexp(1.0, -p);
  std::mt19937_64 rng(seed);
  const std::uint64_t side = std::uint64_t{1} << p;
  std::vector<DyadicRational> upper(static_cast<std::size_t>(d)), middle(upper.size());
  for (std::size_t c = 0; c < cells; ++c) {
    mpz_class lo_prod = 1, hi_prod = 1;
    for (int k = 0; k < d; ++k) {
      const std::uint64_t cell = rng() % side;
      lo_prod *= static_cast<unsigned long>(cell);
      hi_prod *= static_cast<unsigned long>(cell + 1);
      upper[static_cast<std::size_t>(k)] = DyadicRational(mpz_class(static_cast<unsigned long>(cell + 1)), static_cast<unsigned>(p));
      middle[static_cast<std::size_t>(k)] =
          DyadicRational(mpz_class(static_cast<unsigned long>(2 * cell + 1)), static_cast<unsigned>(p + 1));
    }
    if (local_discrepancy(ps, upper).counting != local_discrepancy(ps, middle).counting) r.counting_constant = false;
    const DyadicRational variation(mpz_class(static_cast<unsigned long>(n)) * (hi_prod - lo_prod),
                                   static_cast<unsigned>(p * d));
    r.max_variation = std::max(r.max_variation, variation.to_double());
  }
  r.cells = cells;
  r.pass = r.counting_constant && r.max_variation <= r.bound * (1 + 1e-12);
  return r;
}

}  // namespace disclab
