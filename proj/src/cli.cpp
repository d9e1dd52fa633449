#include "rocket/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "rocket/bench.hpp"
#include "rocket/errors.hpp"
#include "rocket/kernelgen.hpp"
#include "rocket/pooling.hpp"
#include "rocket/random.hpp"
#include "rocket/ridge.hpp"
#include "rocket/surface.hpp"
#include "rocket/text.hpp"
#include "rocket/transform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rocket {
namespace {

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

// Records what a command did, written next to its outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  json seeds = json::object();
  json inputs = json::object();
  json outputs = json::object();
  std::string start_time = now_utc();

  void write(const fs::path& path) const {
    json doc;
    doc["command"] = command;
    doc["argv"] = argv;
    doc["config"] = config;
    doc["seeds"] = seeds;
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["tool_version"] = kToolVersion;
    doc["start_time"] = start_time;
    doc["end_time"] = now_utc();
    write_json(doc, path);
  }
};

json to_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"n_samples", c.n_samples},
          {"n_channels", c.n_channels},
          {"n_timesteps", c.n_timesteps},
          {"target_ra_range", {c.ra_min, c.ra_max}},
          {"spacing", c.spacing},
          {"cutoff", c.cutoff},
          {"sensor_noise_sd", c.sensor_noise_sd},
          {"per_channel_gain_range", {c.gain_min, c.gain_max}},
          {"occlusion_probability", c.occlusion_probability},
          {"correlation_length", c.correlation_length},
          {"arc_half_span", c.arc_half_span},
          {"angular_width", c.angular_width}};
}

SynthConfig synth_config_from_json(const json& doc) {
  SynthConfig c;
  try {
    c.seed = doc.value("seed", c.seed);
    c.n_samples = doc.value("n_samples", c.n_samples);
    c.n_channels = doc.value("n_channels", c.n_channels);
    c.n_timesteps = doc.value("n_timesteps", c.n_timesteps);
    if (doc.contains("target_ra_range")) {
      const auto r = doc["target_ra_range"].get<std::vector<double>>();
      if (r.size() != 2) throw ParameterError("target_ra_range must have two entries");
      c.ra_min = r[0];
      c.ra_max = r[1];
    }
    c.spacing = doc.value("spacing", c.spacing);
    c.cutoff = doc.value("cutoff", c.cutoff);
    c.sensor_noise_sd = doc.value("sensor_noise_sd", c.sensor_noise_sd);
    if (doc.contains("per_channel_gain_range")) {
      const auto r = doc["per_channel_gain_range"].get<std::vector<double>>();
      if (r.size() != 2) throw ParameterError("per_channel_gain_range must have two entries");
      c.gain_min = r[0];
      c.gain_max = r[1];
    }
    c.occlusion_probability = doc.value("occlusion_probability", c.occlusion_probability);
    c.correlation_length = doc.value("correlation_length", c.correlation_length);
    c.arc_half_span = doc.value("arc_half_span", c.arc_half_span);
    c.angular_width = doc.value("angular_width", c.angular_width);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad synth config: ") + e.what());
  }
  c.validate();
  return c;
}

SynthConfig load_synth_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return synth_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json to_json(const PoolingConfig& p) {
  return {{"mode", p.mode == PoolingMode::kHard ? "hard" : "soft"},
          {"lambda", p.lambda},
          {"shift", p.shift},
          {"include_max", p.include_max}};
}

// Flags shared by subcommands that synthesize a dataset.
struct SynthFlags {
  SynthConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", config.seed, "Dataset seed");
    cmd->add_option("--n-samples", config.n_samples, "Number of examples")->capture_default_str();
    cmd->add_option("--channels", config.n_channels, "Sensor channels")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--timesteps", config.n_timesteps, "Timesteps per example")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30))->capture_default_str();
    cmd->add_option("--ra-min", config.ra_min, "Lower target Ra (um)")->capture_default_str();
    cmd->add_option("--ra-max", config.ra_max, "Upper target Ra (um)")->capture_default_str();
    cmd->add_option("--noise-sd", config.sensor_noise_sd, "Sensor noise sd (intensity units)")->capture_default_str();
    cmd->add_option("--gain-min", config.gain_min, "Lower per-channel gain")->capture_default_str();
    cmd->add_option("--gain-max", config.gain_max, "Upper per-channel gain")->capture_default_str();
    cmd->add_option("--occlusion", config.occlusion_probability, "Per-channel occlusion probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--correlation-length", config.correlation_length, "Height correlation length (um)")->capture_default_str();
    cmd->add_option("--cutoff", config.cutoff, "Roughness cutoff wavelength (um)")->capture_default_str();
  }
};

struct PoolingFlags {
  std::string mode = "hard";
  float lambda = 1000.0f;
  float shift = 3.0f;
  bool no_max = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--pooling", mode, "PPV pooling: hard or soft")->check(CLI::IsMember({"hard", "soft"}))->capture_default_str();
    cmd->add_option("--lambda", lambda, "Soft PPV steepness")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--shift", shift, "Soft PPV shift")->capture_default_str();
    cmd->add_flag("--no-max", no_max, "Drop the max-pooling feature");
  }

  PoolingConfig config() const {
    return mode == "soft" ? PoolingConfig::soft(lambda, shift, !no_max) : PoolingConfig::hard(!no_max);
  }
};

// Dataset and kernel selection shared by pipeline and lambda-sweep.
struct ExperimentFlags {
  SynthFlags synth;
  std::string synth_config;
  std::string data;
  std::string labels;
  std::string kernels;
  int num_kernels = 2000;
  std::uint64_t kernel_seed = 0;
  double train_fraction = 0.9;
  std::uint64_t split_seed = 0;
  std::vector<double> alphas = default_alphas();
  std::string out_dir;

  void attach(CLI::App* cmd) {
    synth.attach(cmd);
    auto* cfg = cmd->add_option("--synth-config", synth_config, "SynthConfig JSON file")->check(CLI::ExistingFile);
    auto* data_opt = cmd->add_option("--data", data, "RKDS dataset file")->check(CLI::ExistingFile);
    auto* labels_opt = cmd->add_option("--labels", labels, "Labels CSV (example_id,ra)")->check(CLI::ExistingFile);
    data_opt->needs(labels_opt);
    labels_opt->needs(data_opt);
    cfg->excludes(data_opt);
    cmd->add_option("--kernels", kernels, "Kernel JSON file (otherwise generated)")->check(CLI::ExistingFile);
    cmd->add_option("--num-kernels", num_kernels, "Kernels to generate when --kernels is absent")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--kernel-seed", kernel_seed, "Seed for generated kernels")->capture_default_str();
    cmd->add_option("--train-test-split", train_fraction, "Training fraction, in (0, 1)")
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
              double v = 0.0;
              try {
                v = std::stod(s);
              } catch (...) {
                return "not a number";
              }
              return v > 0.0 && v < 1.0 ? "" : "must lie strictly between 0 and 1";
            },
            "(0,1)"))
        ->capture_default_str();
    cmd->add_option("--split-seed", split_seed, "Seed for the train/test split")->capture_default_str();
    cmd->add_option("--alphas", alphas, "Ridge alpha candidates")->delimiter(',');
    cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  }
};

struct LoadedData {
  TimeSeriesBatch batch;  // normalized
  std::vector<double> labels;
  KernelSet kernels;
};

LoadedData load_experiment(const ExperimentFlags& flags, RunManifest& manifest) {
  LoadedData d;
  TimeSeriesBatch raw;
  if (!flags.data.empty()) {
    raw = read_dataset(flags.data);
    d.labels = read_labels_csv(flags.labels);
    if (d.labels.size() != raw.n_examples()) {
      throw ParameterError("labels file has " + std::to_string(d.labels.size()) + " rows, dataset has " +
                           std::to_string(raw.n_examples()) + " examples");
    }
    manifest.inputs["data"] = flags.data;
    manifest.inputs["labels"] = flags.labels;
  } else {
    const SynthConfig cfg = flags.synth_config.empty() ? flags.synth.config : load_synth_config(flags.synth_config);
    cfg.validate();
    auto ds = generate_dataset(cfg);
    raw = std::move(ds.batch);
    d.labels = std::move(ds.labels);
    manifest.config["synth"] = to_json(cfg);
    manifest.seeds["synth"] = cfg.seed;
    if (!flags.synth_config.empty()) manifest.inputs["synth_config"] = flags.synth_config;
  }
  d.batch = normalize_per_channel(raw);

  if (!flags.kernels.empty()) {
    d.kernels = load_kernels(flags.kernels);
    manifest.inputs["kernels"] = flags.kernels;
  } else {
    d.kernels = generate_kernels(flags.kernel_seed, flags.num_kernels,
                                 static_cast<int>(d.batch.n_timesteps()), static_cast<int>(d.batch.n_channels()));
    manifest.seeds["kernels"] = flags.kernel_seed;
    manifest.config["num_kernels"] = flags.num_kernels;
  }
  manifest.config["train_test_split"] = flags.train_fraction;
  manifest.config["alphas"] = flags.alphas;
  manifest.seeds["split"] = flags.split_seed;
  return d;
}

struct Evaluation {
  RidgeModel model;
  std::vector<double> train_pred;
  std::vector<double> test_pred;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double baseline_mse = 0.0;
};

std::vector<double> pick(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

Evaluation evaluate(const FeatureMatrix& features, std::span<const double> labels, const Split& split,
                    std::span<const double> alphas) {
  Evaluation e;
  const auto y_train = pick(labels, split.train);
  const auto y_test = pick(labels, split.test);
  e.model = fit(features.select(split.train), y_train, alphas);
  e.train_pred = predict(e.model, features.select(split.train));
  e.test_pred = predict(e.model, features.select(split.test));
  e.train_mse = mse(e.train_pred, y_train);
  e.test_mse = mse(e.test_pred, y_test);
  const double mean = std::accumulate(y_train.begin(), y_train.end(), 0.0) / static_cast<double>(y_train.size());
  const std::vector<double> baseline(y_test.size(), mean);
  e.baseline_mse = mse(baseline, y_test);
  return e;
}

Split split_for(const ExperimentFlags& flags, std::span<const double> labels) {
  if (labels.size() < 3) throw ParameterError("need at least 3 examples to split into train and test");
  Split s = stratified_split(labels, flags.train_fraction, flags.split_seed);
  if (s.train.size() < 2) throw ParameterError("training set has fewer than 2 examples");
  return s;
}

void write_predictions(const fs::path& path, const Split& split, std::span<const double> labels,
                       const Evaluation& e) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "example_id,split,actual,predicted\n";
  for (std::size_t k = 0; k < split.train.size(); ++k) {
    out << split.train[k] << ",train," << to_text(labels[split.train[k]]) << ',' << to_text(e.train_pred[k]) << '\n';
  }
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    out << split.test[k] << ",test," << to_text(labels[split.test[k]]) << ',' << to_text(e.test_pred[k]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

int cmd_gen_kernels(std::uint64_t seed, int num_kernels, int input_length, int channels,
                    const std::string& out, RunManifest manifest) {
  const KernelSet set = generate_kernels(seed, num_kernels, input_length, channels);
  save_kernels(set, out);
  manifest.config = {{"num_kernels", num_kernels}, {"input_length", input_length}, {"channels", channels}};
  manifest.seeds["kernels"] = seed;
  manifest.outputs["kernels"] = out;
  fs::path manifest_path = out;
  manifest_path += ".manifest.json";
  manifest.write(manifest_path);
  std::cout << "wrote " << set.count() << " kernels (seed " << seed << ") to " << out << '\n';
  return kExitOk;
}

int cmd_synth(const SynthFlags& flags, const std::string& prefix, RunManifest manifest) {
  const auto ds = generate_dataset(flags.config);
  const fs::path data_path = prefix + ".rkds";
  const fs::path labels_path = prefix + ".labels.csv";
  if (data_path.has_parent_path()) fs::create_directories(data_path.parent_path());
  write_dataset(ds.batch, data_path);
  write_labels_csv(ds.labels, labels_path);
  manifest.config["synth"] = to_json(flags.config);
  manifest.seeds["synth"] = flags.config.seed;
  manifest.outputs = {{"data", data_path.string()}, {"labels", labels_path.string()}};
  manifest.write(prefix + ".manifest.json");
  std::cout << "wrote " << ds.batch.n_examples() << " examples (" << ds.batch.n_channels() << " x "
            << ds.batch.n_timesteps() << ") to " << data_path.string() << '\n';
  return kExitOk;
}

int cmd_pipeline(const ExperimentFlags& flags, const PoolingFlags& pooling_flags, unsigned workers,
                 RunManifest manifest) {
  const PoolingConfig pooling = pooling_flags.config();
  pooling.validate();
  const fs::path dir = flags.out_dir;
  fs::create_directories(dir);

  const LoadedData d = load_experiment(flags, manifest);
  const Split split = split_for(flags, d.labels);
  const FeatureMatrix features = transform_batch(d.batch, d.kernels, pooling, workers);
  const Evaluation e = evaluate(features, d.labels, split, flags.alphas);

  write_features_csv(features, dir / "features.csv");
  save_model(e.model, dir / "model.json");
  write_predictions(dir / "predictions.csv", split, d.labels, e);
  if (flags.kernels.empty()) save_kernels(d.kernels, dir / "kernels.json");
  write_json({{"train_mse", e.train_mse},
              {"test_mse", e.test_mse},
              {"baseline_mse", e.baseline_mse},
              {"alpha", e.model.alpha},
              {"n_train", split.train.size()},
              {"n_test", split.test.size()},
              {"n_features", features.cols()}},
             dir / "metrics.json");

  manifest.config["pooling"] = to_json(pooling);
  manifest.config["workers"] = workers;
  manifest.outputs = {{"features", (dir / "features.csv").string()},
                      {"model", (dir / "model.json").string()},
                      {"predictions", (dir / "predictions.csv").string()},
                      {"metrics", (dir / "metrics.json").string()}};
  if (flags.kernels.empty()) manifest.outputs["kernels"] = (dir / "kernels.json").string();
  manifest.write(dir / "manifest.json");

  std::cout << "train_mse " << e.train_mse << "  test_mse " << e.test_mse << "  baseline_mse " << e.baseline_mse
            << "  alpha " << e.model.alpha << '\n';
  return kExitOk;
}

int cmd_lambda_sweep(const ExperimentFlags& flags, std::vector<float> lambdas, float shift, bool no_max,
                     unsigned workers, RunManifest manifest) {
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<PoolingConfig> poolings;
  for (float l : lambdas) poolings.push_back(PoolingConfig::soft(l, shift, !no_max));
  poolings.push_back(PoolingConfig::hard(!no_max));
  for (const auto& p : poolings) p.validate();

  const fs::path dir = flags.out_dir;
  fs::create_directories(dir);
  const LoadedData d = load_experiment(flags, manifest);
  const Split split = split_for(flags, d.labels);
  const auto features = transform_batch_multi(d.batch, d.kernels, poolings, workers);

  const fs::path csv = dir / "lambda_sweep.csv";
  std::ofstream out(csv, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + csv.string() + " for writing");
  out << "lambda,test_mse\n";
  json rows = json::array();
  for (std::size_t p = 0; p < poolings.size(); ++p) {
    const Evaluation e = evaluate(features[p], d.labels, split, flags.alphas);
    const bool hard = poolings[p].mode == PoolingMode::kHard;
    const std::string label = hard ? "hard" : to_text(poolings[p].lambda);
    out << label << ',' << to_text(e.test_mse) << '\n';
    rows.push_back({{"lambda", label}, {"test_mse", e.test_mse}, {"train_mse", e.train_mse},
                    {"baseline_mse", e.baseline_mse}, {"alpha", e.model.alpha}});
    std::cout << "lambda " << label << "  test_mse " << e.test_mse << '\n';
  }
  if (!out) throw IoError("write failed: " + csv.string());
  out.close();
  write_json(rows, dir / "lambda_sweep.json");

  manifest.config["lambdas"] = lambdas;
  manifest.config["shift"] = shift;
  manifest.config["include_max"] = !no_max;
  manifest.config["workers"] = workers;
  manifest.outputs = {{"sweep", csv.string()}, {"details", (dir / "lambda_sweep.json").string()}};
  manifest.write(dir / "manifest.json");
  return kExitOk;
}

int cmd_bench(BenchConfig config, bool full_sweep, const std::string& out, RunManifest manifest) {
  if (full_sweep) config.batch_sizes = full_sweep_batch_sizes();
  const BenchReport report = run_benchmark(config);
  const fs::path csv = out;
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  export_report(report, csv);
  auto sidecar = csv;
  sidecar.replace_extension(".json");
  manifest.config = {{"batch_sizes", report.config.batch_sizes},
                     {"repeats", config.repeats},
                     {"warmup_iters", config.warmup_iters},
                     {"num_kernels", config.num_kernels},
                     {"n_channels", config.n_channels},
                     {"n_timesteps", config.n_timesteps},
                     {"pooling", to_json(config.pooling)},
                     {"workers", config.workers},
                     {"memory_budget_bytes", config.memory_budget_bytes}};
  manifest.seeds["bench"] = config.seed;
  manifest.outputs = {{"report", csv.string()}, {"metadata", sidecar.string()}};
  fs::path manifest_path = csv;
  manifest_path.replace_extension(".manifest.json");
  manifest.write(manifest_path);
  for (const auto& row : report.rows) {
    std::cout << "batch " << row.batch_size << "  median " << row.median_wall_seconds << " s  "
              << row.throughput_tps << " t/s\n";
  }
  return kExitOk;
}

}  // namespace

Split stratified_split(std::span<const double> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = labels.size();
  if (n < 2) throw ParameterError("need at least 2 examples to split");
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - train_fraction)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });

  Rng rng(seed);
  std::vector<bool> is_test(n, false);
  for (std::size_t s = 0; s < n_test; ++s) {
    const std::size_t lo = s * n / n_test;
    const std::size_t hi = (s + 1) * n / n_test;
    is_test[order[lo + rng.below(hi - lo)]] = true;
  }
  Split split;
  for (std::size_t i = 0; i < n; ++i) (is_test[i] ? split.test : split.train).push_back(i);
  return split;
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Random convolutional kernel transform with PPV/soft-PPV pooling and ridge regression",
               "rocket_forge"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  unsigned workers = 0;
  app.add_option("--workers", workers, "Transform worker threads (0 = all cores)")
      ->envname("ROCKET_FORGE_WORKERS");

  RunManifest manifest;
  manifest.argv = args;

  // gen-kernels
  auto* gen = app.add_subcommand("gen-kernels", "Generate a random kernel set");
  std::uint64_t gen_seed = 0;
  int gen_count = 10000;
  int gen_length = 0;
  int gen_channels = 1;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--num-kernels", gen_count, "Number of kernels")->check(CLI::NonNegativeNumber)->capture_default_str();
  gen->add_option("--input-length", gen_length, "Series length the kernels must fit")->required()->check(CLI::Range(11, 1 << 30));
  gen->add_option("--channels", gen_channels, "Number of input channels")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--out", gen_out, "Output kernel JSON")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic surface-measurement dataset");
  SynthFlags synth_flags;
  synth_flags.attach(synth);
  std::string synth_prefix;
  std::string synth_config_path;
  synth->add_option("--config", synth_config_path, "SynthConfig JSON (flags are ignored when given)")->check(CLI::ExistingFile);
  synth->add_option("--out-prefix", synth_prefix, "Writes <prefix>.rkds, <prefix>.labels.csv")->required();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Normalize, transform, fit ridge and evaluate");
  ExperimentFlags pipe_flags;
  PoolingFlags pipe_pooling;
  pipe_flags.attach(pipeline);
  pipe_pooling.attach(pipeline);

  // lambda-sweep
  auto* sweep = app.add_subcommand("lambda-sweep", "Test MSE across soft-PPV lambdas plus hard PPV");
  ExperimentFlags sweep_flags;
  sweep_flags.attach(sweep);
  std::vector<float> lambdas = {1, 2, 3, 4, 8, 16, 64, 256, 1000};
  float sweep_shift = 3.0f;
  bool sweep_no_max = false;
  sweep->add_option("--lambdas", lambdas, "Soft-PPV lambdas")->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--shift", sweep_shift, "Soft PPV shift")->capture_default_str();
  sweep->add_flag("--no-max", sweep_no_max, "Drop the max-pooling feature");

  // bench
  auto* bench = app.add_subcommand("bench", "Batch-size throughput sweep of the transform");
  BenchConfig bench_config;
  PoolingFlags bench_pooling;
  bool full_sweep = false;
  std::uint64_t budget_mb = bench_config.memory_budget_bytes >> 20;
  std::string bench_out;
  bench->add_option("--batch-sizes", bench_config.batch_sizes, "Batch sizes to time")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_flag("--full-sweep", full_sweep, "Use the 1..1000 log-spaced sweep");
  bench->add_option("--repeats", bench_config.repeats, "Timed runs per batch size")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--warmup", bench_config.warmup_iters, "Untimed runs per batch size")->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--num-kernels", bench_config.num_kernels, "Kernels")->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--channels", bench_config.n_channels, "Channels")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--timesteps", bench_config.n_timesteps, "Timesteps")->check(CLI::Range(11, 1 << 30))->capture_default_str();
  bench->add_option("--seed", bench_config.seed, "Seed for kernels, inputs and run order")->capture_default_str();
  bench->add_option("--memory-budget-mb", budget_mb, "Refuse batches estimated above this size")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--out", bench_out, "Report CSV path (JSON sidecar alongside)")->required();
  bench_pooling.attach(bench);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      manifest.command = "gen-kernels";
      return cmd_gen_kernels(gen_seed, gen_count, gen_length, gen_channels, gen_out, manifest);
    }
    if (*synth) {
      manifest.command = "synth";
      if (!synth_config_path.empty()) {
        synth_flags.config = load_synth_config(synth_config_path);
        manifest.inputs["synth_config"] = synth_config_path;
      }
      return cmd_synth(synth_flags, synth_prefix, manifest);
    }
    if (*pipeline) {
      manifest.command = "pipeline";
      return cmd_pipeline(pipe_flags, pipe_pooling, workers, manifest);
    }
    if (*sweep) {
      manifest.command = "lambda-sweep";
      return cmd_lambda_sweep(sweep_flags, lambdas, sweep_shift, sweep_no_max, workers, manifest);
    }
    if (*bench) {
      manifest.command = "bench";
      bench_config.pooling = bench_pooling.config();
      bench_config.workers = workers;
      bench_config.memory_budget_bytes = budget_mb << 20;
      return cmd_bench(bench_config, full_sweep, bench_out, manifest);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace rocket
