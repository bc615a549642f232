#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "disclab/haar.hpp"
#include "disclab/norm_report.hpp"
#include "disclab/point_set.hpp"

namespace disclab {

/// Young function psi(x) = slope*x for x <= threshold, e^{x^alpha} - 1 above.
struct OrliczSpec {
  double alpha = 1.0;
  double threshold = 0.0;
  double slope = 1.0;

  /// Pure exponential for alpha >= 1; tangent-line closure through the
  /// origin for alpha < 1.
  static OrliczSpec make(double alpha);
  double psi(double x) const;
  double psi_derivative(double x) const;
};

// ---- L_p of the discrepancy function ------------------------------------

struct LpOptions {
  enum class Engine { Auto, Rational, Quadrature };
  Engine engine = Engine::Auto;
  /// Limit on the cell count (N+1)^d.
  double budget = 1e9;
  /// Auto uses the rational engine while (N+1)^d * p stays below this.
  double rational_limit = 2e4;
};

/// Exact integral of D^p (p even) in rational arithmetic.
mpq_class lp_power_rational(const PointSet& ps, int p, double budget = 1e9);

/// ||D||_p for even p. The quadrature engine integrates the last coordinate
/// in closed form per constant-count segment and uses Gauss-Legendre rules
/// of sufficient degree on the remaining cell coordinates, so it is exact up
/// to floating-point rounding.
NormReport lp_norm_exact(const PointSet& ps, int p, const LpOptions& opts = {});

struct SampleOptions {
  std::size_t samples = std::size_t{1} << 16;
  std::uint64_t seed = 1;
};

using PointFunction = std::function<double(std::span<const double>)>;

/// Stratified samples of |f|: g^d strata, two uniform points per stratum.
struct StratifiedSample {
  int d = 0;
  std::size_t strata = 0;
  std::vector<double> first;   // |f| at the first point of each stratum
  std::vector<double> second;  // |f| at the second point
};

StratifiedSample stratified_sample(int d, const PointFunction& f, const SampleOptions& opts);

/// |D(x)| in floating point, for sampling.
PointFunction discrepancy_function(const PointSet& ps);

NormReport lp_norm_estimate(const PointSet& ps, double p, const SampleOptions& opts = {});
NormReport lp_norm_estimate(int d, const PointFunction& f, double p, const SampleOptions& opts = {});

// ---- Orlicz norms ----------------------------------------------------------

struct OrliczOptions {
  SampleOptions sampling;
  double rel_tol = 1e-6;
  int max_expansions = 60;
};

/// Luxemburg norm inf{K : E psi(|f|/K) <= 1} by bisection in log K over a
/// fixed stratified sample.
NormReport orlicz_norm_direct(const PointSet& ps, const OrliczSpec& spec, const OrliczOptions& opts = {});
NormReport orlicz_norm_direct(int d, const PointFunction& f, const OrliczSpec& spec, const OrliczOptions& opts = {});

struct ProxyOptions {
  std::vector<int> p_grid{2, 4, 8, 16, 32};
  LpOptions lp;
  /// Skip p whose Hoelder bound cannot beat the running maximum.
  bool prune = true;
  double star_budget = 1e12;
};

/// max over p of p^{-1/alpha} ||D||_p.
NormReport orlicz_norm_proxy(const PointSet& ps, double alpha, const ProxyOptions& opts = {});
/// Same maximum from precomputed (p, ||f||_p) pairs.
NormReport orlicz_proxy_from_lp(double alpha, const std::vector<std::pair<double, double>>& lp);

struct InterpolationReport {
  double alpha = 0, beta = 0;
  double norm_alpha = 0, norm_beta = 0, sup_norm = 0;
  /// Smallest C with norm_beta <= C norm_alpha^{alpha/beta} sup^{1-alpha/beta}.
  double constant = 0;
  nlohmann::json to_json() const;
};

InterpolationReport interpolation_check(const PointSet& ps, double alpha, double beta, const ProxyOptions& opts = {});
InterpolationReport interpolation_from_lp(double alpha, double beta, const std::vector<std::pair<double, double>>& lp,
                                          double sup_norm);

// ---- functions given by Haar tables -----------------------------------------

/// A function that is constant on the 2^{level*d} cells of a dyadic grid.
struct CellFunction {
  int d = 0;
  int level = 0;
  std::vector<double> values;  // cell index packs coordinates first-most-significant

  double lp_norm(double p) const;
  double sup_norm() const;
  double value_at(std::span<const double> x) const;
  PointFunction as_function() const;
};

struct CellOptions {
  double budget = 1e8;  // maximum cell count
};

/// f = sum over the table of 2^{|j|} coeff h_{j,m}.
CellFunction synthesize(const HaarCoefficientTable& table, const CellOptions& opts = {});
/// Sf over all shapes of the table.
CellFunction square_function_cells(const HaarCoefficientTable& table, const CellOptions& opts = {});

struct CwwReport {
  double orlicz_proxy = 0;
  double square_sup = 0;
  std::optional<double> ratio;  // empty for the zero function
  nlohmann::json to_json() const;
};

/// Single-order table (every shape in N_0^d with the same |j|, d >= 2):
/// exp(L^{2/(d-1)}) proxy of f against ||Sf||_inf.
CwwReport cww_check(const HaarCoefficientTable& table, const std::vector<int>& p_grid = {2, 4, 8, 16, 32});

struct LittlewoodPaleyRow {
  int p = 0;
  double f_norm = 0;
  double sf_norm = 0;
  /// ||f||_p / (p^{(d-1)/2} ||Sf||_p); zero when Sf vanishes.
  double constant = 0;
};

std::vector<LittlewoodPaleyRow> littlewood_paley_check(const HaarCoefficientTable& table, const std::vector<int>& p_grid);

// ---- BMO -------------------------------------------------------------------

struct BmoOptions {
  int order_cap = 3;
  bool unions = true;
};

/// Energy |U|^{-1} sum_{j in N_0^d} 2^{|j|} sum_{I_{j,m} in U} coeff^2 at U = cube.
long double bmo_cube_energy(const HaarCoefficientTable& table);

/// Square root of the largest energy over the candidate family: the cube,
/// every box of order <= order_cap, and for each such shape the unions of
/// its k most energetic boxes. A lower bound for the BMO norm.
NormReport bmo_proxy(const HaarCoefficientTable& table, const BmoOptions& opts = {});

}  // namespace disclab
