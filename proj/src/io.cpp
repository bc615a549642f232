#include "disclab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "disclab/errors.hpp"

namespace disclab {

namespace {

// Next line that is neither blank nor a comment; false at end of input.
bool next_line(std::istream& in, std::string& line, std::size_t& number) {
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

long parse_int(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw ParseError("expected an integer, got '" + s + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("expected an integer, got '" + s + "'", line);
  }
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return in;
}

}  // namespace

PointSet read_point_set(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  if (!next_line(in, line, number)) throw ParseError("missing header 'd N precision_bits'", number);
  const auto head = tokens(line);
  if (head.size() != 3) throw ParseError("header must be 'd N precision_bits'", number);
  const long d = parse_int(head[0], number), n = parse_int(head[1], number), p = parse_int(head[2], number);
  if (d < 1) throw ParseError("dimension must be positive", number);
  if (n < 0) throw ParseError("point count must be non-negative", number);
  if (p < 0 || p > PointSet::kMaxPrecision) throw ParseError("precision_bits must lie in [0, 62]", number);
  PointSet ps(static_cast<int>(d), static_cast<int>(p));
  std::vector<std::uint64_t> row(static_cast<std::size_t>(d));
  for (long i = 0; i < n; ++i) {
    if (!next_line(in, line, number))
      throw ParseError("expected " + std::to_string(n) + " points, found " + std::to_string(i), number);
    const auto t = tokens(line);
    if (t.size() != static_cast<std::size_t>(d))
      throw ParseError("expected " + std::to_string(d) + " coordinates", number);
    for (long k = 0; k < d; ++k) {
      DyadicRational x;
      try {
        x = DyadicRational::parse(t[static_cast<std::size_t>(k)]);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), number);
      }
      if (x.sign() < 0 || !(x < DyadicRational(1))) throw ParseError("coordinate outside [0,1)", number);
      if (x.exponent() > static_cast<unsigned>(p)) throw ParseError("coordinate finer than precision_bits", number);
      row[static_cast<std::size_t>(k)] = x.scaled_numerator(static_cast<unsigned>(p)).get_ui();
    }
    ps.push_back(row);
  }
  if (next_line(in, line, number)) throw ParseError("unexpected content after the last point", number);
  return ps;
}

void write_point_set(std::ostream& out, const PointSet& ps) {
  out << ps.dimension() << " " << ps.size() << " " << ps.precision_bits() << "\n";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (int k = 0; k < ps.dimension(); ++k) out << (k ? " " : "") << ps.coordinate(i, k).to_string();
    out << "\n";
  }
}

PointSet load_point_set(const std::string& path) {
  auto in = open(path);
  return read_point_set(in);
}

DigitalNetSpec read_matrix_file(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  if (!next_line(in, line, number)) throw ParseError("missing header 'd n sigma'", number);
  const auto head = tokens(line);
  if (head.size() != 3) throw ParseError("header must be 'd n sigma'", number);
  DigitalNetSpec spec;
  spec.d = static_cast<int>(parse_int(head[0], number));
  spec.n = static_cast<int>(parse_int(head[1], number));
  spec.sigma = static_cast<int>(parse_int(head[2], number));
  if (spec.d < 1 || spec.n < 0 || spec.n > 62 || spec.sigma < 1 || spec.sigma * spec.n > PointSet::kMaxPrecision)
    throw ParseError("header values out of range", number);
  const int rows = spec.sigma * spec.n;
  for (int i = 0; i < spec.d; ++i) {
    F2Matrix c(rows, spec.n);
    for (int r = 0; r < rows; ++r) {
      if (!next_line(in, line, number))
        throw ParseError("matrix " + std::to_string(i + 1) + " ends after " + std::to_string(r) + " rows", number);
      const auto t = tokens(line);
      if (t.size() != 1 || t[0].size() != static_cast<std::size_t>(spec.n))
        throw ParseError("expected a row of " + std::to_string(spec.n) + " characters from {0,1}", number);
      for (int col = 0; col < spec.n; ++col) {
        const char ch = t[0][static_cast<std::size_t>(col)];
        if (ch != '0' && ch != '1') throw ParseError("row characters must be 0 or 1", number);
        c.set(r, col, ch == '1');
      }
    }
    spec.matrices.push_back(std::move(c));
  }
  if (next_line(in, line, number)) throw ParseError("unexpected content after the last matrix", number);
  return spec;
}

void write_matrix_file(std::ostream& out, const DigitalNetSpec& spec) {
  out << spec.d << " " << spec.n << " " << spec.sigma << "\n";
  for (const auto& c : spec.matrices)
    for (int r = 0; r < c.rows(); ++r) {
      for (int col = 0; col < c.cols(); ++col) out << (c.get(r, col) ? '1' : '0');
      out << "\n";
    }
}

DigitalNetSpec load_matrix_file(const std::string& path) {
  auto in = open(path);
  return read_matrix_file(in);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

std::string metadata_line(const nlohmann::json& config) {
  return std::string("# disclab ") + kVersion + " config=" + config_hash(config);
}

nlohmann::json metadata_json(const nlohmann::json& config) {
  return {{"tool", "disclab"}, {"version", kVersion}, {"config_hash", config_hash(config)}, {"config", config}};
}

}  // namespace disclab
