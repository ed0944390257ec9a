#include "dac/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dac {

double binomial_pmf(std::int64_t n, std::int64_t j, double p) {
  if (j < 0 || j > n) return 0.0;
  if (p <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return j == n ? 1.0 : 0.0;
  const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(j) + 1.0) -
                            std::lgamma(static_cast<double>(n - j) + 1.0);
  return std::exp(log_choose + static_cast<double>(j) * std::log(p) +
                  static_cast<double>(n - j) * std::log1p(-p));
}

double binomial_cdf_below(std::int64_t n, double p, std::int64_t k) {
  if (k <= 0) return 0.0;
  if (k > n) return 1.0;
  double sum = 0.0;
  for (std::int64_t j = 0; j < k; ++j) sum += binomial_pmf(n, j, p);
  return std::min(1.0, sum);
}

std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;  // exact: r * num is divisible by i at every step
  }
  return r;
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw std::invalid_argument("bisection bracket has no sign change");
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
  }
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

double pow_difference(double a, double b, double nu) {
  if (nu == 1.0) return a - b;
  return std::pow(b, nu) * std::expm1(nu * std::log1p((a - b) / b));
}

}  // namespace dac
