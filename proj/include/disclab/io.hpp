#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "disclab/gf2net.hpp"
#include "disclab/point_set.hpp"

namespace disclab {

inline constexpr const char* kVersion = "0.3.1";

/// "d N precision_bits", then N lines of d numbers "a/2^k". Lines starting
/// with '#' are ignored. Throws ParseError with the offending line.
PointSet read_point_set(std::istream& in);
void write_point_set(std::ostream& out, const PointSet& ps);
PointSet load_point_set(const std::string& path);

/// "d n sigma", then d blocks of sigma*n lines with n characters from {0,1}.
/// Line lambda of a block is row lambda; character c is column c.
DigitalNetSpec read_matrix_file(std::istream& in);
void write_matrix_file(std::ostream& out, const DigitalNetSpec& spec);
DigitalNetSpec load_matrix_file(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);

/// Hash of the canonical serialization of a configuration, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// "# disclab <version> config=<hash>".
std::string metadata_line(const nlohmann::json& config);

/// {"tool", "version", "config_hash", "config"} for JSON outputs.
nlohmann::json metadata_json(const nlohmann::json& config);

}  // namespace disclab
