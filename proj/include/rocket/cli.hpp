#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rocket {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded split stratified by label quantile: examples are sorted by label,
/// cut into n_test contiguous strata of near-equal size, and one example per
/// stratum goes to the test set. n_test = max(1, round(N * (1 - train_fraction))).
/// Both index lists come back sorted ascending.
Split stratified_split(std::span<const double> labels, double train_fraction, std::uint64_t seed);

/// Entry point for the rocket_forge tool. `args[0]` is the program name.
int run_cli(std::vector<std::string> args);

}  // namespace rocket
