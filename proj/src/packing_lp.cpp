#include "dac/packing_lp.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>

namespace dac {
namespace {

constexpr double kPivotTol = 1e-12;

}  // namespace

LpSolution maximize_lp(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  const std::size_t m = b.size();
  const std::size_t n = c.size();
  if (a.size() != m * n) throw std::invalid_argument("constraint matrix has the wrong shape");
  for (double bi : b) {
    if (bi < 0.0) throw std::invalid_argument("right-hand side must be non-negative");
  }

  // Columns: n structural, m slack, then the right-hand side.
  const std::size_t width = n + m + 1;
  std::vector<double> t((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t col) -> double& { return t[r * width + col]; };
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) at(r, j) = a[r * n + j];
    at(r, n + r) = 1.0;
    at(r, width - 1) = b[r];
  }
  // Objective row holds reduced costs as -c.
  for (std::size_t j = 0; j < n; ++j) at(m, j) = -c[j];

  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;

  while (true) {
    // Bland: smallest-index improving column.
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (at(m, j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double coef = at(r, enter);
      if (coef <= kPivotTol) continue;
      const double ratio = at(r, width - 1) / coef;
      if (leave == m || ratio < best_ratio - kPivotTol) {
        leave = r;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + kPivotTol && basis[r] < basis[leave]) {
        leave = r;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    if (leave == m) return {LpSolution::Status::Unbounded, std::numeric_limits<double>::infinity(), {}};

    const double pivot = at(leave, enter);
    for (std::size_t j = 0; j < width; ++j) at(leave, j) /= pivot;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double factor = at(r, enter);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) at(r, j) -= factor * at(leave, j);
    }
    basis[leave] = enter;
  }

  LpSolution sol;
  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] < n) sol.x[basis[r]] = std::max(0.0, at(r, width - 1));
  }
  sol.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.value += c[j] * sol.x[j];
  return sol;
}

std::vector<std::uint32_t> enumerate_subsets(std::size_t n, std::size_t size) {
  if (n > 31) throw std::invalid_argument("subset enumeration supports at most 31 members");
  std::vector<std::uint32_t> out;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) == size) out.push_back(mask);
  }
  return out;
}

SubsetPackingSolution solve_subset_packing(std::span<const double> capacities, std::size_t group_size) {
  const std::size_t n = capacities.size();
  SubsetPackingSolution out;
  out.subsets = enumerate_subsets(n, group_size);
  const std::size_t g = out.subsets.size();
  if (g == 0) return out;

  // x_G <= 1 only binds when some capacity exceeds 1.
  const bool need_bounds = std::any_of(capacities.begin(), capacities.end(), [](double r) { return r > 1.0; });
  const std::size_t rows = n + (need_bounds ? g : 0);

  std::vector<double> a(rows * g, 0.0);
  std::vector<double> b(rows, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = std::max(0.0, capacities[i]);
    for (std::size_t col = 0; col < g; ++col) {
      if ((out.subsets[col] >> i) & 1u) a[i * g + col] = 1.0;
    }
  }
  if (need_bounds) {
    for (std::size_t col = 0; col < g; ++col) {
      a[(n + col) * g + col] = 1.0;
      b[n + col] = 1.0;
    }
  }
  const std::vector<double> c(g, 1.0);
  const LpSolution sol = maximize_lp(a, b, c);
  out.value = sol.value;
  out.weights = sol.x;
  return out;
}

}  // namespace dac
