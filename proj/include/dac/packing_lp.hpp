#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dac {

struct LpSolution {
  enum class Status { Optimal, Unbounded };
  Status status = Status::Optimal;
  double value = 0.0;
  std::vector<double> x;
};

/// maximize c.x subject to A x <= b, x >= 0, with b >= 0 so the origin is a
/// feasible start. Dense tableau simplex with Bland's rule; `a` is row-major
/// with b.size() rows and c.size() columns.
LpSolution maximize_lp(std::span<const double> a, std::span<const double> b, std::span<const double> c);

struct SubsetPackingSolution {
  double value = 0.0;
  std::vector<std::uint32_t> subsets;  // bitmask of each group, in enumeration order
  std::vector<double> weights;         // x_G for each group
};

/// Enumerates the groups of `group_size` members out of capacities.size() and
/// solves
///   maximize sum_G x_G
///   s.t.     sum_{G containing i} x_G <= capacities[i],  0 <= x_G <= 1.
SubsetPackingSolution solve_subset_packing(std::span<const double> capacities, std::size_t group_size);

/// All bitmasks over n members with exactly `size` bits set, ascending.
std::vector<std::uint32_t> enumerate_subsets(std::size_t n, std::size_t size);

}  // namespace dac
