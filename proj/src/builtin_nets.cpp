#include <array>
#include <limits>

#include "disclab/errors.hpp"
#include "disclab/gf2net.hpp"

namespace disclab {

namespace {

struct DirectionEntry {
  int s;
  unsigned a;
  std::array<std::uint64_t, 6> m;
};

// Joe-Kuo direction numbers for Sobol coordinates 2, 3, ...
constexpr std::array<DirectionEntry, 15> kJoeKuo{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

// Sobol coordinate `coord` (1-based) as an n x n matrix.
F2Matrix sobol_matrix(int coord, int n) {
  if (coord == 1) return F2Matrix::identity(n);
  const auto& e = kJoeKuo.at(static_cast<std::size_t>(coord - 2));
  std::vector<std::uint64_t> m(static_cast<std::size_t>(n) + 1, 0);  // m[1..n]
  for (int i = 1; i <= n; ++i) {
    if (i <= e.s) {
      m[static_cast<std::size_t>(i)] = e.m[static_cast<std::size_t>(i - 1)];
      continue;
    }
    std::uint64_t v = m[static_cast<std::size_t>(i - e.s)];
    v ^= m[static_cast<std::size_t>(i - e.s)] << e.s;
    for (int k = 1; k < e.s; ++k)
      if ((e.a >> (e.s - 1 - k)) & 1U) v ^= m[static_cast<std::size_t>(i - k)] << k;
    m[static_cast<std::size_t>(i)] = v;
  }
  F2Matrix c(n, n);
  for (int col = 0; col < n; ++col)
    for (int row = 0; row <= col; ++row)
      if ((m[static_cast<std::size_t>(col + 1)] >> (col - row)) & 1U) c.set(row, col, true);
  return c;
}

}  // namespace

std::vector<std::string> builtin_net_names() { return {"hammersley", "sobol", "zero"}; }

int builtin_max_dimension(const std::string& name) {
  const int sobol = static_cast<int>(kJoeKuo.size()) + 1;
  if (name == "sobol") return sobol;
  if (name == "hammersley") return sobol + 1;
  if (name == "zero") return std::numeric_limits<int>::max();
  throw DomainError("unknown builtin net '" + name + "'");
}

DigitalNetSpec builtin_base(const std::string& name, int dims, int n) {
  if (dims < 1) throw DomainError("builtin_base: dimension must be positive");
  if (n < 0 || n > PointSet::kMaxPrecision) throw DomainError("builtin_base: n out of range");
  if (dims > builtin_max_dimension(name))
    throw DomainError("builtin net '" + name + "' supports at most " +
                      std::to_string(builtin_max_dimension(name)) + " dimensions");
  DigitalNetSpec spec;
  spec.d = dims;
  spec.n = n;
  spec.sigma = 1;
  for (int i = 0; i < dims; ++i) {
    if (name == "zero")
      spec.matrices.emplace_back(n, n);
    else if (name == "sobol")
      spec.matrices.push_back(sobol_matrix(i + 1, n));
    else if (i == 0)
      spec.matrices.push_back(F2Matrix::identity(n));
    else if (i == 1)
      spec.matrices.push_back(F2Matrix::reversal(n));
    else
      spec.matrices.push_back(sobol_matrix(i, n));
  }
  spec.validate();
  return spec;
}

DigitalNetSpec builtin_net(const std::string& name, int d, int n, int sigma) {
  if (sigma < 1) throw DomainError("builtin_net: order must be at least 1");
  return interlace(builtin_base(name, sigma * d, n), sigma);
}

}  // namespace disclab
