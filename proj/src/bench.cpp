#include "rocket/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rocket/errors.hpp"
#include "rocket/kernelgen.hpp"
#include "rocket/random.hpp"
#include "rocket/text.hpp"
#include "rocket/transform.hpp"

namespace rocket {
namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kCsvHeader = "batch_size,repeat,wall_seconds,median_wall_seconds,throughput_tps";

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double timer_resolution() {
  using period = Clock::period;
  return static_cast<double>(period::num) / static_cast<double>(period::den);
}

TimeSeriesBatch synthesize_inputs(Rng& rng, std::size_t n, const BenchConfig& config) {
  TimeSeriesBatch batch(n, static_cast<std::size_t>(config.n_channels),
                        static_cast<std::size_t>(config.n_timesteps));
  for (auto& v : batch.data()) v = static_cast<float>(rng.normal());
  return batch;
}

}  // namespace

void BenchConfig::normalize() {
  if (repeats < 1) throw ParameterError("repeats must be >= 1");
  if (warmup_iters < 0) throw ParameterError("warmup_iters must be >= 0");
  if (num_kernels < 0) throw ParameterError("num_kernels must be >= 0");
  if (n_channels < 1) throw ParameterError("n_channels must be >= 1");
  if (n_timesteps < 11) throw ParameterError("n_timesteps must be >= 11");
  pooling.validate();
  for (auto b : batch_sizes) {
    if (b == 0) throw ParameterError("batch sizes must be positive");
  }
  std::sort(batch_sizes.begin(), batch_sizes.end());
  batch_sizes.erase(std::unique(batch_sizes.begin(), batch_sizes.end()), batch_sizes.end());
}

std::vector<std::size_t> full_sweep_batch_sizes() {
  std::vector<std::size_t> sizes;
  for (int i = 0; i <= 30; ++i) {
    sizes.push_back(static_cast<std::size_t>(std::llround(std::pow(1000.0, i / 30.0))));
  }
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  return sizes;
}

std::uint64_t estimate_batch_bytes(const BenchConfig& config, std::size_t batch_size) {
  const std::uint64_t n = batch_size;
  const std::uint64_t inputs = n * static_cast<std::uint64_t>(config.n_channels) *
                               static_cast<std::uint64_t>(config.n_timesteps) * sizeof(float);
  const std::uint64_t features =
      n * feature_count(static_cast<std::size_t>(config.num_kernels), config.pooling) * sizeof(float);
  const unsigned workers = config.workers == 0 ? default_worker_count() : config.workers;
  const std::uint64_t scratch =
      static_cast<std::uint64_t>(std::min<std::uint64_t>(workers, n)) *
      (static_cast<std::uint64_t>(config.n_timesteps) * 2) * sizeof(float);
  return inputs + features + scratch;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ParameterError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

BenchReport run_benchmark(BenchConfig config) {
  config.normalize();
  for (auto b : config.batch_sizes) {
    const auto need = estimate_batch_bytes(config, b);
    if (need > config.memory_budget_bytes) {
      throw SizingError("batch size " + std::to_string(b) + " needs ~" + std::to_string(need) +
                        " bytes, over the budget of " + std::to_string(config.memory_budget_bytes));
    }
  }

  BenchReport report;
  report.config = config;
  report.worker_count = config.workers == 0 ? default_worker_count() : config.workers;
  report.timestamp = utc_timestamp();
  report.timer_resolution_seconds = timer_resolution();

  const KernelSet kernels =
      generate_kernels(config.seed, config.num_kernels, config.n_timesteps, config.n_channels);

  Rng order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(config.batch_sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  order_rng.shuffle(order);

  Rng data_rng(config.seed + 1);
  std::vector<BenchRow> rows(config.batch_sizes.size());
  for (std::size_t slot : order) {
    const std::size_t n = config.batch_sizes[slot];
    report.execution_order.push_back(n);
    const TimeSeriesBatch inputs = synthesize_inputs(data_rng, n, config);
    FeatureMatrix out(n, feature_count(kernels.count(), config.pooling));

    for (int w = 0; w < config.warmup_iters; ++w) {
      transform_batch_into(inputs, kernels, config.pooling, out, config.workers);
    }
    BenchRow row;
    row.batch_size = n;
    for (int r = 0; r < config.repeats; ++r) {
      const std::size_t allocations_before = TimeSeriesBatch::allocation_count();
      const auto start = Clock::now();
      transform_batch_into(inputs, kernels, config.pooling, out, config.workers);
      const auto stop = Clock::now();
      report.input_allocations_in_timed_region += TimeSeriesBatch::allocation_count() - allocations_before;
      row.wall_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    }
    // Guard against a zero reading on coarse clocks.
    row.median_wall_seconds = std::max(median(row.wall_seconds), report.timer_resolution_seconds);
    row.throughput_tps = static_cast<double>(n) / row.median_wall_seconds;
    rows[slot] = std::move(row);
  }
  report.rows = std::move(rows);
  return report;
}

void export_report(const BenchReport& report, const std::filesystem::path& csv_path) {
  {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + csv_path.string() + " for writing");
    out << kCsvHeader << '\n';
    for (const auto& row : report.rows) {
      for (std::size_t r = 0; r < row.wall_seconds.size(); ++r) {
        out << row.batch_size << ',' << r << ',' << to_text(row.wall_seconds[r]) << ','
            << to_text(row.median_wall_seconds) << ',' << to_text(row.throughput_tps) << '\n';
      }
    }
    if (!out) throw IoError("write failed: " + csv_path.string());
  }

  const auto& c = report.config;
  nlohmann::json meta;
  meta["worker_count"] = report.worker_count;
  meta["timestamp"] = report.timestamp;
  meta["timer"] = "steady_clock";
  meta["timer_resolution_seconds"] = report.timer_resolution_seconds;
  meta["input_allocations_in_timed_region"] = report.input_allocations_in_timed_region;
  meta["execution_order"] = report.execution_order;
  meta["config"] = {
      {"batch_sizes", c.batch_sizes},
      {"repeats", c.repeats},
      {"warmup_iters", c.warmup_iters},
      {"num_kernels", c.num_kernels},
      {"n_channels", c.n_channels},
      {"n_timesteps", c.n_timesteps},
      {"pooling", {{"mode", c.pooling.mode == PoolingMode::kHard ? "hard" : "soft"},
                   {"lambda", c.pooling.lambda},
                   {"shift", c.pooling.shift},
                   {"include_max", c.pooling.include_max}}},
      {"seed", c.seed},
      {"workers", c.workers},
      {"memory_budget_bytes", c.memory_budget_bytes},
  };
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + json_path.string() + " for writing");
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + json_path.string());
}

std::vector<BenchRow> read_report_csv(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError(csv_path.string() + ": bad header");
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5) throw FormatError(csv_path.string() + ": bad row '" + line + "'");
    const auto batch = parse_number<std::size_t>(f[0]);
    const auto repeat = parse_number<std::size_t>(f[1]);
    if (rows.empty() || rows.back().batch_size != batch) {
      rows.push_back(BenchRow{batch, {}, parse_number<double>(f[3]), parse_number<double>(f[4])});
    }
    if (repeat != rows.back().wall_seconds.size()) throw FormatError(csv_path.string() + ": repeats out of order");
    rows.back().wall_seconds.push_back(parse_number<double>(f[2]));
  }
  return rows;
}

}  // namespace rocket
