#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace disclab {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitResource = 3 };

struct RunConfig {
  std::string command;
  std::string builtin;
  std::string matrix;
  std::string points;
  std::string out;
  int d = 2;
  int n = 4;
  int sigma = 1;
  std::optional<int> t;
  std::optional<int> max_level;
  std::uint64_t seed = 1;
  std::string p_grid = "2,4,8,16,32";
  std::optional<double> budget;
  std::string format = "json";
  std::string which;
  std::string n_range;
  std::string norm = "l2";
  std::string window;
  double alpha = 0;  // 0: 2/(d-1)
  std::size_t samples = 1 << 16;
  int order_cap = 3;

  /// Every field, for hashing into output metadata.
  nlohmann::json to_json() const;
};

/// Runs the command line; returns one of the ExitCode values.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parses "4..10" or "4,5,6"; throws DomainError.
std::vector<int> parse_int_list(const std::string& text);

}  // namespace disclab
