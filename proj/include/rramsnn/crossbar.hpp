#pragma once

// Wire-resistance read error inside a multi-device synapse and the choice of
// its R x C layout.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rramsnn {

struct Arrangement {
  std::size_t rows = 1;
  std::size_t cols = 1;
  double k_wire = 1.0;

  friend bool operator==(const Arrangement&, const Arrangement&) = default;
};

/// Read-current error at 1-based cross-point (r, c); grows linearly with the
/// distance from the driven row and the sensed column.
inline double read_error(std::size_t r, std::size_t c, double k_wire) {
  if (r < 1 || c < 1) throw std::invalid_argument("read_error: cross-point indices are 1-based");
  if (k_wire < 0.0) throw std::invalid_argument("read_error: k_wire must be >= 0");
  return k_wire * static_cast<double>(r + c);
}

/// Worst cross-point is the far corner (R, C).
inline double max_read_error(const Arrangement& a) { return read_error(a.rows, a.cols, a.k_wire); }

/// Every (R, C) with R * C == n, R ascending.
inline std::vector<Arrangement> factorizations(std::size_t n, double k_wire = 1.0) {
  if (n < 1) throw std::invalid_argument("factorizations: n must be >= 1");
  std::vector<Arrangement> out;
  for (std::size_t r = 1; r <= n; ++r)
    if (n % r == 0) out.push_back({r, n / r, k_wire});
  return out;
}

/// Exact factorization of n minimizing R + C, with R <= C: the largest
/// divisor not exceeding sqrt(n).
inline Arrangement best_arrangement(std::size_t n, double k_wire = 1.0) {
  if (n < 1) throw std::invalid_argument("best_arrangement: n must be >= 1");
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  while (n % r != 0) --r;
  return {r, n / r, k_wire};
}

}  // namespace rramsnn
