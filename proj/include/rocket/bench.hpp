#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rocket/pooling.hpp"

namespace rocket {

struct BenchConfig {
  std::vector<std::size_t> batch_sizes = {1, 2, 4, 8, 16, 32, 64};
  int repeats = 3;
  int warmup_iters = 2;
  int num_kernels = 2000;
  int n_channels = 20;
  int n_timesteps = 2000;
  PoolingConfig pooling;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::uint64_t memory_budget_bytes = 4ULL << 30;

  // Sorts and deduplicates batch_sizes; throws ParameterError on bad values.
  void normalize();
};

/// The batch sizes of the full-scale sweep, 1 to 1000 log-spaced.
std::vector<std::size_t> full_sweep_batch_sizes();

struct BenchRow {
  std::size_t batch_size = 0;
  std::vector<double> wall_seconds;
  double median_wall_seconds = 0.0;
  double throughput_tps = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // ascending batch size
  std::vector<std::size_t> execution_order;
  unsigned worker_count = 0;
  std::string timestamp;
  double timer_resolution_seconds = 0.0;
  std::size_t input_allocations_in_timed_region = 0;
  BenchConfig config;
};

/// Estimated peak bytes for transforming one batch of `batch_size` examples.
std::uint64_t estimate_batch_bytes(const BenchConfig& config, std::size_t batch_size);

/// Runs every batch size once in a seeded random order: builds inputs, runs
/// warmup_iters untimed transforms, then `repeats` timed ones. Throws
/// SizingError before doing any work if a batch exceeds the memory budget.
BenchReport run_benchmark(BenchConfig config);

/// CSV "batch_size,repeat,wall_seconds,median_wall_seconds,throughput_tps"
/// plus a JSON sidecar (same path, .json extension) with run metadata.
void export_report(const BenchReport& report, const std::filesystem::path& csv_path);

/// Parses the CSV written by export_report back into rows.
std::vector<BenchRow> read_report_csv(const std::filesystem::path& csv_path);

double median(std::vector<double> values);

}  // namespace rocket
