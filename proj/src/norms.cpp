#include "disclab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "disclab/discrepancy.hpp"
#include "disclab/errors.hpp"
#include "disclab/parallel.hpp"

namespace disclab {

// ---- Orlicz ------------------------------------------------------------------

OrliczSpec OrliczSpec::make(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("OrliczSpec: alpha must be positive");
  OrliczSpec s;
  s.alpha = alpha;
  if (alpha >= 1) return s;
  // Tangency u = x^alpha: 1 - e^{-u} = alpha u.
  double lo = 1e-12, hi = 1.0 / alpha;
  auto g = [alpha](double u) { return -std::expm1(-u) - alpha * u; };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  const double u = 0.5 * (lo + hi);
  s.threshold = std::pow(u, 1.0 / alpha);
  s.slope = std::expm1(u) / s.threshold;
  return s;
}

double OrliczSpec::psi(double x) const {
  if (x <= threshold) return slope * x;
  return std::expm1(std::pow(x, alpha));
}

double OrliczSpec::psi_derivative(double x) const {
  if (x <= threshold) return slope;
  const double u = std::pow(x, alpha);
  return alpha * u / x * std::exp(u);
}

NormReport orlicz_norm_direct(int d, const PointFunction& f, const OrliczSpec& spec, const OrliczOptions& opts) {
  const StratifiedSample smp = stratified_sample(d, f, opts.sampling);
  const double strata = static_cast<double>(smp.strata);
  double vmax = 0, sq = 0;
  for (std::size_t s = 0; s < smp.strata; ++s) {
    vmax = std::max({vmax, smp.first[s], smp.second[s]});
    sq += smp.first[s] * smp.first[s] + smp.second[s] * smp.second[s];
  }
  NormReport r;
  r.method = NormMethod::Bisection;
  r.params = {{"alpha", spec.alpha},     {"threshold", spec.threshold}, {"slope", spec.slope},
              {"seed", opts.sampling.seed}, {"samples", 2 * smp.strata},  {"rel_tol", opts.rel_tol}};
  if (vmax == 0) {
    r.value = 0;
    r.error_bound = 0;
    return r;
  }
  auto expectation = [&](double k) {
    long double acc = 0;
    for (std::size_t s = 0; s < smp.strata; ++s) acc += spec.psi(smp.first[s] / k) + spec.psi(smp.second[s] / k);
    return static_cast<double>(acc / (2 * strata));
  };
  const double rms = std::sqrt(sq / (2 * strata));
  double lo = rms / 10, hi = 10 * vmax;
  int expansions = 0;
  while (!(expectation(hi) <= 1)) {
    if (++expansions > opts.max_expansions) throw ResourceError("orlicz_norm_direct: upper bracket expansion capped");
    hi *= 10;
  }
  while (expectation(lo) <= 1) {
    if (++expansions > opts.max_expansions) throw ResourceError("orlicz_norm_direct: lower bracket expansion capped");
    lo /= 10;
  }
  while (hi / lo - 1 > opts.rel_tol) {
    const double mid = std::sqrt(lo * hi);
    (expectation(mid) > 1 ? lo : hi) = mid;
  }
  const double k = std::sqrt(lo * hi);

  // Delta method: sd of the expectation over the derivative in K.
  long double var = 0, slope = 0;
  for (std::size_t s = 0; s < smp.strata; ++s) {
    const double a = smp.first[s] / k, b = smp.second[s] / k;
    const long double diff = spec.psi(a) - spec.psi(b);
    var += diff * diff / 4;
    slope += (spec.psi_derivative(a) * a + spec.psi_derivative(b) * b) / 2;
  }
  const double se = static_cast<double>(std::sqrt(var) / strata);
  const double deriv = static_cast<double>(slope / strata) / k;
  r.value = k;
  r.error_bound = (deriv > 0 ? se / deriv : 0.0) + opts.rel_tol * k;
  return r;
}

NormReport orlicz_norm_direct(const PointSet& ps, const OrliczSpec& spec, const OrliczOptions& opts) {
  NormReport r = orlicz_norm_direct(ps.dimension(), discrepancy_function(ps), spec, opts);
  r.params["N"] = ps.size();
  return r;
}

NormReport orlicz_proxy_from_lp(double alpha, const std::vector<std::pair<double, double>>& lp) {
  if (lp.empty()) throw DomainError("orlicz proxy: empty p grid");
  if (!(alpha > 0)) throw DomainError("orlicz proxy: alpha must be positive");
  NormReport r;
  r.method = NormMethod::ProxySupP;
  nlohmann::json rows = nlohmann::json::array();
  double best = 0, best_p = lp.front().first;
  for (const auto& [p, v] : lp) {
    const double scaled = std::pow(p, -1.0 / alpha) * v;
    rows.push_back({{"p", p}, {"lp", v}, {"scaled", scaled}});
    if (scaled > best) {
      best = scaled;
      best_p = p;
    }
  }
  r.value = best;
  r.params = {{"alpha", alpha}, {"lp", rows}, {"argmax_p", best_p}};
  return r;
}

NormReport orlicz_norm_proxy(const PointSet& ps, double alpha, const ProxyOptions& opts) {
  if (opts.p_grid.empty()) throw DomainError("orlicz_norm_proxy: empty p grid");
  std::vector<int> grid = opts.p_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::optional<double> sup;
  const double star_work = static_cast<double>(ps.size()) * std::pow(static_cast<double>(ps.size()) + 2, ps.dimension());
  if (opts.prune && star_work <= opts.star_budget) sup = star_discrepancy(ps, {opts.star_budget}).value;

  std::vector<std::pair<double, double>> computed;
  std::vector<int> pruned;
  double best = 0;
  for (int p : grid) {
    const double weight = std::pow(static_cast<double>(p), -1.0 / alpha);
    if (sup && !computed.empty()) {
      double bound = *sup;
      for (const auto& [q, v] : computed) bound = std::min(bound, std::pow(v, q / p) * std::pow(*sup, 1 - q / p));
      if (weight * bound * (1 + 1e-9) <= best) {
        pruned.push_back(p);
        continue;
      }
    }
    const double v = p == 2 ? l2_warnock(ps).value : lp_norm_exact(ps, p, opts.lp).value;
    computed.emplace_back(p, v);
    best = std::max(best, weight * v);
  }
  NormReport r = orlicz_proxy_from_lp(alpha, computed);
  r.params["pruned_p"] = pruned;
  r.params["N"] = ps.size();
  r.params["d"] = ps.dimension();
  if (sup) r.params["star"] = *sup;
  return r;
}

nlohmann::json InterpolationReport::to_json() const {
  return {{"alpha", alpha},       {"beta", beta},         {"norm_alpha", norm_alpha},
          {"norm_beta", norm_beta}, {"sup_norm", sup_norm}, {"constant", constant}};
}

InterpolationReport interpolation_from_lp(double alpha, double beta, const std::vector<std::pair<double, double>>& lp,
                                          double sup_norm) {
  if (!(alpha < beta)) throw DomainError("interpolation_check: need alpha < beta");
  InterpolationReport r;
  r.alpha = alpha;
  r.beta = beta;
  r.norm_alpha = orlicz_proxy_from_lp(alpha, lp).value;
  r.norm_beta = orlicz_proxy_from_lp(beta, lp).value;
  r.sup_norm = sup_norm;
  const double theta = alpha / beta;
  const double rhs = std::pow(r.norm_alpha, theta) * std::pow(sup_norm, 1 - theta);
  r.constant = rhs > 0 ? r.norm_beta / rhs : 0.0;
  return r;
}

InterpolationReport interpolation_check(const PointSet& ps, double alpha, double beta, const ProxyOptions& opts) {
  if (!(alpha < beta)) throw DomainError("interpolation_check: need alpha < beta");
  InterpolationReport r;
  r.alpha = alpha;
  r.beta = beta;
  r.norm_alpha = orlicz_norm_proxy(ps, alpha, opts).value;
  r.norm_beta = orlicz_norm_proxy(ps, beta, opts).value;
  r.sup_norm = star_discrepancy(ps, {std::max(opts.star_budget, 1e12)}).value;
  const double theta = alpha / beta;
  const double rhs = std::pow(r.norm_alpha, theta) * std::pow(r.sup_norm, 1 - theta);
  r.constant = rhs > 0 ? r.norm_beta / rhs : 0.0;
  return r;
}

// ---- cell functions ------------------------------------------------------------

double CellFunction::lp_norm(double p) const {
  if (values.empty()) return 0;
  long double acc = 0;
  for (double v : values) acc += std::pow(static_cast<long double>(std::fabs(v)), p);
  return static_cast<double>(std::pow(acc / values.size(), 1.0L / p));
}

double CellFunction::sup_norm() const {
  double m = 0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

double CellFunction::value_at(std::span<const double> x) const {
  std::size_t idx = 0;
  const double cells = std::ldexp(1.0, level);
  for (int k = 0; k < d; ++k) {
    const auto c = static_cast<std::size_t>(std::min(cells - 1, std::floor(x[static_cast<std::size_t>(k)] * cells)));
    idx = (idx << level) | c;
  }
  return values[idx];
}

PointFunction CellFunction::as_function() const {
  return [this](std::span<const double> x) { return value_at(x); };
}

namespace {

int cell_level(const HaarCoefficientTable& table) {
  int top = -1;
  for (const auto& b : table.blocks())
    for (int j : b.j) top = std::max(top, j);
  return std::max(1, top + 1);
}

// Calls visit(cell, block, key, sign) for every block at every cell.
template <class Visit>
CellFunction over_cells(const HaarCoefficientTable& table, const CellOptions& opts, Visit&& visit) {
  CellFunction f;
  f.d = table.dimension();
  f.level = cell_level(table);
  const double cells = std::ldexp(1.0, f.level * f.d);
  if (cells > opts.budget) throw ResourceError("cell evaluation: 2^{level*d} cells exceed budget");
  f.values.assign(static_cast<std::size_t>(cells), 0.0);
  const std::uint64_t mask = (std::uint64_t{1} << f.level) - 1;
  parallel_for(f.values.size(), [&](std::size_t cell) {
    std::vector<std::uint64_t> coord(static_cast<std::size_t>(f.d)), m(coord.size());
    for (int k = f.d - 1, shift = 0; k >= 0; --k, shift += f.level)
      coord[static_cast<std::size_t>(k)] = (static_cast<std::uint64_t>(cell) >> shift) & mask;
    long double acc = 0;
    for (const auto& b : table.blocks()) {
      int sign = 1;
      for (std::size_t k = 0; k < coord.size(); ++k) {
        const int j = b.j[k];
        if (j < 0) {
          m[k] = 0;
          continue;
        }
        m[k] = coord[k] >> (f.level - j);
        if ((coord[k] >> (f.level - j - 1)) & 1U) sign = -sign;
      }
      acc += visit(b, pack_position(b.j, m), sign);
    }
    f.values[cell] = static_cast<double>(acc);
  });
  return f;
}

}  // namespace

CellFunction synthesize(const HaarCoefficientTable& table, const CellOptions& opts) {
  return over_cells(table, opts, [&](const HaarCoefficientTable::Block& b, std::uint64_t key, int sign) {
    return std::ldexp(table.coefficient_ld(b, key), order(b.j)) * sign;
  });
}

CellFunction square_function_cells(const HaarCoefficientTable& table, const CellOptions& opts) {
  CellFunction f = over_cells(table, opts, [&](const HaarCoefficientTable::Block& b, std::uint64_t key, int) {
    const long double c = table.coefficient_ld(b, key);
    return std::ldexp(c * c, 2 * order(b.j));
  });
  for (auto& v : f.values) v = std::sqrt(v);
  return f;
}

nlohmann::json CwwReport::to_json() const {
  return {{"orlicz_proxy", orlicz_proxy},
          {"square_sup", square_sup},
          {"ratio", ratio ? nlohmann::json(*ratio) : nlohmann::json(nullptr)}};
}

namespace {

void require_single_order(const HaarCoefficientTable& table) {
  if (table.dimension() < 2) throw DomainError("single-order check needs d >= 2");
  std::optional<int> ord;
  for (const auto& b : table.blocks()) {
    if (std::any_of(b.j.begin(), b.j.end(), [](int j) { return j < 0; }))
      throw DomainError("single-order check: shapes must lie in N_0^d");
    if (ord && *ord != order(b.j)) throw DomainError("single-order check: shapes of different orders");
    ord = order(b.j);
  }
}

}  // namespace

CwwReport cww_check(const HaarCoefficientTable& table, const std::vector<int>& p_grid) {
  require_single_order(table);
  const CellFunction f = synthesize(table);
  const CellFunction sf = square_function_cells(table);
  std::vector<std::pair<double, double>> lp;
  for (int p : p_grid) lp.emplace_back(p, f.lp_norm(p));
  CwwReport r;
  r.orlicz_proxy = orlicz_proxy_from_lp(2.0 / (table.dimension() - 1), lp).value;
  r.square_sup = sf.sup_norm();
  if (r.square_sup > 0) r.ratio = r.orlicz_proxy / r.square_sup;
  return r;
}

std::vector<LittlewoodPaleyRow> littlewood_paley_check(const HaarCoefficientTable& table, const std::vector<int>& p_grid) {
  require_single_order(table);
  const CellFunction f = synthesize(table);
  const CellFunction sf = square_function_cells(table);
  std::vector<LittlewoodPaleyRow> rows;
  for (int p : p_grid) {
    LittlewoodPaleyRow row;
    row.p = p;
    row.f_norm = f.lp_norm(p);
    row.sf_norm = sf.lp_norm(p);
    const double scale = std::pow(static_cast<double>(p), (table.dimension() - 1) / 2.0);
    row.constant = row.sf_norm > 0 ? row.f_norm / (scale * row.sf_norm) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

// ---- BMO ---------------------------------------------------------------------------

namespace {

bool nonnegative(const Shape& j) {
  return std::all_of(j.begin(), j.end(), [](int v) { return v >= 0; });
}

void require_complete(const HaarCoefficientTable& table) {
  if (table.from_points() && table.max_level() < table.precision_bits() - 1)
    throw DomainError("bmo: table truncated below precision_bits - 1");
}

// Energy change of one stored entry relative to its linear-only value.
long double entry_excess(const HaarCoefficientTable& table, Int128 num, long double lin, int ord) {
  const long double c = table.counting_ld(num);
  return std::ldexp(c * (c - 2 * lin), ord);
}

long double n_squared(const HaarCoefficientTable& table) {
  const long double n = static_cast<long double>(table.point_count());
  return n * n;
}

}  // namespace

long double bmo_cube_energy(const HaarCoefficientTable& table) {
  require_complete(table);
  const int d = table.dimension();
  long double energy = n_squared(table) * std::pow(1.0L / 12, d);
  for (const auto& b : table.blocks()) {
    if (!nonnegative(b.j)) continue;
    const long double lin = table.linear_ld(b.j);
    const int ord = order(b.j);
    for (auto c : b.counting) energy += entry_excess(table, c, lin, ord);
  }
  return energy;
}

NormReport bmo_proxy(const HaarCoefficientTable& table, const BmoOptions& opts) {
  require_complete(table);
  const int d = table.dimension();
  const long double nn = n_squared(table);
  const long double cube = bmo_cube_energy(table);
  long double best = cube;
  nlohmann::json best_set = "cube";
  std::size_t candidates = 1;

  const int top_level = std::max(0, table.max_level());
  for (int ord = 1; ord <= opts.order_cap; ++ord) {
    for (const auto& b : enumerate_shapes(d, ord)) {
      if (std::any_of(b.begin(), b.end(), [&](int v) { return v > top_level; })) continue;
      // All coarsenings c <= b, each with 2^{|c|} boxes.
      std::vector<Shape> coarse;
      Shape c(static_cast<std::size_t>(d), 0);
      for (;;) {
        coarse.push_back(c);
        std::size_t k = 0;
        while (k < c.size() && c[k] == b[k]) c[k++] = 0;
        if (k == c.size()) break;
        ++c[k];
      }
      std::map<Shape, std::size_t> slot;
      std::vector<std::vector<long double>> agg;
      std::vector<long double> tail;
      for (const auto& s : coarse) {
        slot[s] = agg.size();
        agg.emplace_back(std::size_t{1} << order(s), 0.0L);
        long double t = nn * std::ldexp(1.0L, -order(s));
        for (int k = 0; k < d; ++k) {
          const int ck = s[static_cast<std::size_t>(k)], bk = b[static_cast<std::size_t>(k)];
          t *= ck < bk ? std::ldexp(1.0L, -2 * ck - 4) : std::ldexp(1.0L, -2 * bk - 2) / 3;
        }
        tail.push_back(t);
      }
      Shape cs(static_cast<std::size_t>(d));
      std::vector<std::uint64_t> cm(static_cast<std::size_t>(d));
      for (const auto& blk : table.blocks()) {
        if (!nonnegative(blk.j)) continue;
        for (int k = 0; k < d; ++k)
          cs[static_cast<std::size_t>(k)] = std::min(blk.j[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k)]);
        auto& row = agg[slot.at(cs)];
        const long double lin = table.linear_ld(blk.j);
        const int o = order(blk.j);
        for (std::size_t e = 0; e < blk.keys.size(); ++e) {
          const auto m = unpack_position(blk.j, blk.keys[e]);
          for (std::size_t k = 0; k < m.size(); ++k) cm[k] = m[k] >> (blk.j[k] - cs[k]);
          row[pack_position(cs, cm)] += entry_excess(table, blk.counting[e], lin, o);
        }
      }

      const std::size_t fine = slot.at(b);
      const std::size_t boxes = std::size_t{1} << ord;
      std::vector<std::size_t> rank(boxes);
      for (std::size_t i = 0; i < boxes; ++i) rank[i] = i;
      const auto& energy = agg[fine];
      std::stable_sort(rank.begin(), rank.end(), [&](std::size_t x, std::size_t y) { return energy[x] > energy[y]; });

      const std::size_t limit = opts.unions ? boxes : 1;
      std::vector<std::vector<std::size_t>> covered(coarse.size());
      for (std::size_t s = 0; s < coarse.size(); ++s) covered[s].assign(agg[s].size(), 0);
      long double union_energy = 0;
      for (std::size_t k = 0; k < limit; ++k) {
        const auto m = unpack_position(b, rank[k]);
        for (std::size_t s = 0; s < coarse.size(); ++s) {
          for (std::size_t q = 0; q < m.size(); ++q) cm[q] = m[q] >> (b[q] - coarse[s][q]);
          const auto key = pack_position(coarse[s], cm);
          const std::size_t need = std::size_t{1} << (ord - order(coarse[s]));
          if (++covered[s][key] == need) union_energy += tail[s] + agg[s][key];
        }
        const long double value = union_energy / (static_cast<long double>(k + 1) * std::ldexp(1.0L, -ord));
        ++candidates;
        if (value > best) {
          best = value;
          best_set = {{"shape", b}, {"boxes", k + 1}};
        }
      }
    }
  }
  NormReport r;
  r.method = NormMethod::BmoProxy;
  r.value = static_cast<double>(std::sqrt(std::max(best, 0.0L)));
  r.params = {{"cube_energy", static_cast<double>(cube)},
              {"best_energy", static_cast<double>(best)},
              {"best_set", best_set},
              {"order_cap", opts.order_cap},
              {"candidates", candidates}};
  return r;
}

}  // namespace disclab
