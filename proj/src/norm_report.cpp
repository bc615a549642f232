#include "disclab/norm_report.hpp"

namespace disclab {

std::string to_string(NormMethod m) {
  switch (m) {
    case NormMethod::ExactCell: return "exact-cell";
    case NormMethod::MonteCarlo: return "monte-carlo";
    case NormMethod::Parseval: return "parseval";
    case NormMethod::Warnock: return "warnock";
    case NormMethod::ProxySupP: return "proxy-sup-p";
    case NormMethod::Bisection: return "bisection";
    case NormMethod::ExactGrid: return "exact-grid";
    case NormMethod::BmoProxy: return "bmo-proxy";
    case NormMethod::ClosedForm: return "closed-form";
  }
  return "unknown";
}

nlohmann::json NormReport::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["method"] = to_string(method);
  j["error_bound"] = error_bound ? nlohmann::json(*error_bound) : nlohmann::json(nullptr);
  j["params"] = params;
  return j;
}

}  // namespace disclab
