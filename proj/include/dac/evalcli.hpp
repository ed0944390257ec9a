#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dac/model.hpp"

namespace dac {

inline constexpr double kDefaultEthUsdRate = 1231.0;

/// Grid for the p0-versus-N curves. The committee N - f - k + 1 is
/// max(1, floor(N / 3)) at every point.
struct SweepSpec {
  std::vector<std::int64_t> n_values;
  std::vector<double> nu_values{0.1, 0.5, 0.8, 1.0};
  double epsilon_target = 1e-6;
  double eth_usd_rate = kDefaultEthUsdRate;
  Coin stake = 32.0;
  Coin clue_cost = 0.0226;

  static SweepSpec defaults(std::size_t points = 200, std::int64_t n_max = 300000);
  void require_valid() const;
};

/// `points` log-spaced integers from lo to hi inclusive, rounded, duplicates removed.
std::vector<std::int64_t> log_spaced_counts(std::int64_t lo, std::int64_t hi, std::size_t points);

std::int64_t sweep_committee(std::int64_t n_nodes);

struct SweepRow {
  std::int64_t n_nodes = 0;
  double nu = 1.0;
  double epsilon_target = 0.0;
  Coin p0_lower_eth = 0.0;
  Coin p0_upper_eth = 0.0;
  double p0_lower_usd = 0.0;
  double p0_upper_usd = 0.0;
};

inline constexpr const char* kSweepHeader =
    "n_nodes,nu,epsilon_target,p0_lower_eth,p0_upper_eth,p0_lower_usd,p0_upper_usd";

/// Rows sorted by (nu, n_nodes).
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Six significant digits, shortest of fixed or scientific, '.' separator.
std::string format_sig6(double v);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);

struct BoundsRow {
  double nu = 1.0;
  Coin p0_min_eth = 0.0;
  Coin p0_max_eth = 0.0;
  double p0_min_usd = 0.0;
  double p0_max_usd = 0.0;
  bool saturated = false;
};

std::vector<BoundsRow> compute_bounds(const ProtocolParams& params, const std::vector<double>& nu_values,
                                      double epsilon_target, double eth_usd_rate);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Regular output
/// goes to `out` unless --output names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dac
