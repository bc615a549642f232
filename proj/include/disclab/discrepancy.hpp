#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <gmpxx.h>

#include "disclab/dyadic.hpp"
#include "disclab/norm_report.hpp"
#include "disclab/point_set.hpp"

namespace disclab {

struct DiscrepancyValue {
  std::size_t counting = 0;  // points in [0, x)
  DyadicRational linear;     // N * x_1 * ... * x_d
  DyadicRational value() const { return DyadicRational(static_cast<long>(counting)) - linear; }
};

/// D(x) for x in [0,1]^d.
DiscrepancyValue local_discrepancy(const PointSet& ps, std::span<const DyadicRational> x);

struct StarOptions {
  /// Limit on N * (N+2)^d.
  double budget = 1e12;
};

/// Exact sup_x |D(x)| as a dyadic rational.
DyadicRational star_discrepancy_exact(const PointSet& ps, const StarOptions& opts = {});
/// Same value wrapped in a report (method exact-grid, params.exact holds "a/2^k").
NormReport star_discrepancy(const PointSet& ps, const StarOptions& opts = {});

/// Exact squared L2 norm of D via the pair-sum identity. Requires N >= 1.
mpq_class l2_squared_warnock(const PointSet& ps);
NormReport l2_warnock(const PointSet& ps);

}  // namespace disclab
