#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace disclab {

enum class NormMethod {
  ExactCell,
  MonteCarlo,
  Parseval,
  Warnock,
  ProxySupP,
  Bisection,
  ExactGrid,   // critical-grid enumeration (star discrepancy)
  BmoProxy,    // lower bound over a candidate family of sets
  ClosedForm,  // exact finite sum, e.g. the empty-box bound
};

std::string to_string(NormMethod m);

struct NormReport {
  double value = 0.0;
  NormMethod method = NormMethod::ClosedForm;
  std::optional<double> error_bound;
  nlohmann::json params = nlohmann::json::object();

  /// {value, method, error_bound, params}; error_bound is null when absent.
  nlohmann::json to_json() const;
};

}  // namespace disclab
