#pragma once

#include <cstdint>
#include <functional>

namespace dac {

// Root tolerances shared by every bisection in the library.
inline constexpr double kProbabilityRootTol = 1e-10;  // absolute, roots in [0, 1]
inline constexpr double kCoinRootRelTol = 1e-10;      // relative, coin-amount roots

/// C(n, j) p^j (1 - p)^(n - j), exact edge handling at p = 0 and p = 1.
double binomial_pmf(std::int64_t n, std::int64_t j, double p);

/// Pr[Binomial(n, p) < k].
double binomial_cdf_below(std::int64_t n, double p, std::int64_t k);

/// Number of k-subsets of an n-set, saturating at UINT64_MAX.
std::uint64_t choose(std::uint64_t n, std::uint64_t k);

/// Bisection for a sign change of `f` on [lo, hi]; requires f(lo) and f(hi)
/// to have opposite signs (or one of them to be zero). Runs until the bracket
/// stops shrinking in floating point, then returns the endpoint with the
/// smaller |f|.
double bisect(const std::function<double(double)>& f, double lo, double hi);

/// a^nu - b^nu for a, b > 0, without catastrophic cancellation when a ~ b.
double pow_difference(double a, double b, double nu);

}  // namespace dac
