#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "disclab/dyadic.hpp"
#include "disclab/haar.hpp"
#include "disclab/norm_report.hpp"
#include "disclab/point_set.hpp"

namespace disclab {

// ---- empty boxes -------------------------------------------------------------

struct EmptyBoxShape {
  Shape j;
  std::uint64_t empty = 0;
  std::uint64_t total = 0;
};

struct EmptyBoxReport {
  int n = 0;  // 2N <= 2^n < 4N
  std::size_t points = 0;
  std::vector<EmptyBoxShape> shapes;
  bool pass = true;  // every shape has >= 2^{n-1} empty boxes
  DyadicRational bound_squared;  // sum over shapes of 2^n * empty * coeff_linear^2
  double bound = 0;
  nlohmann::json to_json() const;
};

/// Scale n with 2N <= 2^n < 4N.
int empty_box_scale(std::size_t n_points);

EmptyBoxReport check_empty_boxes(const PointSet& ps);
NormReport bmo_lower_bound(const PointSet& ps);

// ---- regime sums ----------------------------------------------------------------

/// Split of the cube energy sum_{j in N_0^d} 2^{|j|} sum_m coeff^2. The small
/// regime (|j| >= n) is split into its linear, counting and cross parts, so
/// the five components add up to the total.
struct RegimeSums {
  double large = 0;         // |j| < n - ceil(t/2)
  double intermediate = 0;  // n - ceil(t/2) <= |j| < n
  double small_linear = 0;
  double small_counting = 0;
  double small_cross = 0;  // -2 sum 2^{|j|} counting * linear
  double total = 0;
  nlohmann::json to_json() const;
};

RegimeSums three_regime_sums(const HaarCoefficientTable& table, int n, int t);

// ---- coefficient bounds ---------------------------------------------------------

/// Smallest constants making the coefficient bounds hold for one table.
struct CoefficientFit {
  double c1 = 0;  // |coeff| <= c1 2^{-|j|} for |j| >= n - ceil(t/2)
  double c2 = 0;  // all but 2^n positions per shape: |coeff| <= c2 2^{-2|j|+n}
  double c3 = 0;  // |coeff| <= c3 2^{-n} (2n - t - 2|j|)^{d-1} for |j| < n - ceil(t/2)
  std::uint64_t max_exceptions = 0;  // largest per-shape count above c2 2^{-2|j|+n}
  nlohmann::json to_json() const;
};

/// Every shape covered by the table, including those with some j_k = -1.
CoefficientFit fit_coefficient_bounds(const HaarCoefficientTable& table, int n, int t);

/// Number of coefficients violating the three bounds with the given constants.
std::uint64_t coefficient_bound_violations(const HaarCoefficientTable& table, int n, int t, const CoefficientFit& constants);

// ---- scaling studies --------------------------------------------------------------

enum class StudyNorm { BmoProxy, OrliczProxy, Star, L2, BmoLower };

StudyNorm parse_study_norm(const std::string& name);
std::string to_string(StudyNorm norm);

struct StudyRow {
  int n = 0;
  std::size_t points = 0;
  double value = 0;
  std::string method;
};

struct ScalingStudy {
  std::string construction;
  int d = 0;
  int sigma = 1;
  StudyNorm norm = StudyNorm::L2;
  std::vector<StudyRow> rows;
  double exponent = 0;
  double intercept = 0;
  double residual = 0;  // root mean square of the log residuals
  nlohmann::json to_json() const;
};

/// Least squares slope of log(value) against log(n).
struct PowerFit {
  double exponent = 0;
  double intercept = 0;
  double residual = 0;
};
PowerFit fit_power_law(const std::vector<std::pair<double, double>>& points);

struct StudyOptions {
  double alpha = 0;  // orlicz exponent; 0 selects 2/(d-1)
  int order_cap = 3;
};

/// For each n builds builtin_net(construction, d, n, sigma) and evaluates the
/// norm. BmoLower uses a net with N = 2^{n-1} points, so that its empty-box
/// scale equals n.
ScalingStudy scaling_study(const std::string& construction, int d, int sigma, const std::vector<int>& n_range,
                           StudyNorm norm, const StudyOptions& opts = {});

// ---- discretization ---------------------------------------------------------------

struct DiscretizationReport {
  bool applicable = true;
  std::string reason;
  std::size_t cells = 0;
  bool counting_constant = true;
  double max_variation = 0;
  double bound = 0;  // N d 2^{-P}
  bool pass = true;
  nlohmann::json to_json() const;
};

/// Samples cells of the 2^{-P} grid and checks that the counting part is
/// constant on each and that |D| moves by at most N d 2^{-P} across it.
/// Applicable to sets with N a power of two and precision at most 32 bits.
DiscretizationReport discretization_consistency(const PointSet& ps, std::size_t cells = 1000, std::uint64_t seed = 1);

}  // namespace disclab
