#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "oracles.hpp"
#include "rocket/cli.hpp"
#include "rocket/kernelgen.hpp"
#include "rocket/surface.hpp"

using namespace rocket;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "rocket_forge");
  return run_cli(std::move(args));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::vector<std::string> small_data() {
  return {"--n-samples", "40", "--channels", "4", "--timesteps", "300", "--num-kernels", "100"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("gen-kernels: writes the file, manifest, and is byte-reproducible") {
  const auto dir = oracle::temp_dir("cli_gen");
  const auto a = (dir / "a.json").string();
  const auto b = (dir / "b.json").string();
  CHECK(run({"gen-kernels", "--num-kernels", "100", "--input-length", "512", "--channels", "1", "--out", a}) == 0);
  CHECK(run({"gen-kernels", "--num-kernels", "100", "--input-length", "512", "--channels", "1", "--out", b}) == 0);
  CHECK(load_kernels(a).count() == 100);
  CHECK(slurp(a) == slurp(b));
  const auto manifest = read_json(a + ".manifest.json");
  CHECK(manifest["command"] == "gen-kernels");
  CHECK(manifest["seeds"]["kernels"] == 0);
  CHECK(manifest.contains("start_time"));
  CHECK(manifest.contains("end_time"));
  CHECK(manifest.contains("tool_version"));
}

TEST_CASE("gen-kernels: usage errors exit 2") {
  CHECK(run({"gen-kernels", "--num-kernels", "100", "--input-length", "512"}) == kExitUsage);
  CHECK(run({"gen-kernels", "--input-length", "5", "--out", "/tmp/x.json"}) == kExitUsage);
  CHECK(run({"gen-kernels", "--input-length", "abc", "--out", "/tmp/x.json"}) == kExitUsage);
  CHECK(run({}) == kExitUsage);
  CHECK(run({"no-such-command"}) == kExitUsage);
}

TEST_CASE("gen-kernels: unwritable output exits 1") {
  CHECK(run({"gen-kernels", "--input-length", "100", "--out", "/nonexistent-dir/k.json"}) == kExitRuntime);
}

TEST_CASE("synth: header, determinism, empty dataset") {
  const auto dir = oracle::temp_dir("cli_synth");
  const auto p1 = (dir / "one").string();
  const auto p2 = (dir / "two").string();
  const std::vector<std::string> flags{"--n-samples", "10", "--channels", "3", "--timesteps", "100", "--seed", "4"};
  CHECK(run(concat({"synth", "--out-prefix", p1}, flags)) == 0);
  CHECK(run(concat({"synth", "--out-prefix", p2}, flags)) == 0);
  CHECK(read_dataset(p1 + ".rkds").n_examples() == 10);
  CHECK(slurp(p1 + ".rkds") == slurp(p2 + ".rkds"));
  CHECK(slurp(p1 + ".labels.csv") == slurp(p2 + ".labels.csv"));
  CHECK(read_labels_csv(p1 + ".labels.csv").size() == 10);
  CHECK(read_json(p1 + ".manifest.json")["config"]["synth"]["n_samples"] == 10);

  const auto empty = (dir / "empty").string();
  CHECK(run({"synth", "--n-samples", "0", "--out-prefix", empty}) == 0);
  CHECK(read_dataset(empty + ".rkds").n_examples() == 0);

  CHECK(run({"synth", "--occlusion", "2", "--out-prefix", empty}) == kExitUsage);
  CHECK(run({"synth", "--ra-min", "3", "--ra-max", "1", "--out-prefix", empty}) == kExitRuntime);
}

TEST_CASE("synth: --config JSON file") {
  const auto dir = oracle::temp_dir("cli_synth_cfg");
  std::ofstream(dir / "cfg.json") << R"({"seed": 9, "n_samples": 5, "n_channels": 2, "n_timesteps": 64, "target_ra_range": [1.0, 1.2]})";
  CHECK(run({"synth", "--config", (dir / "cfg.json").string(), "--out-prefix", (dir / "d").string()}) == 0);
  const auto batch = read_dataset(dir / "d.rkds");
  CHECK(batch.n_examples() == 5);
  CHECK(batch.n_channels() == 2);
  CHECK(batch.n_timesteps() == 64);
}

TEST_CASE("pipeline: writes all outputs and a consistent manifest") {
  const auto dir = oracle::temp_dir("cli_pipeline");
  const auto out = (dir / "run").string();
  CHECK(run(concat({"pipeline", "--out-dir", out}, small_data())) == 0);
  for (const char* f : {"features.csv", "model.json", "predictions.csv", "metrics.json", "manifest.json", "kernels.json"}) {
    CHECK(fs::exists(fs::path(out) / f));
  }
  const auto metrics = read_json(fs::path(out) / "metrics.json");
  CHECK(metrics.contains("train_mse"));
  CHECK(metrics.contains("test_mse"));
  CHECK(metrics.contains("baseline_mse"));
  CHECK(metrics["n_test"] == 4);
  CHECK(metrics["n_train"] == 36);
  CHECK(metrics["n_features"] == 200);
  const auto manifest = read_json(fs::path(out) / "manifest.json");
  CHECK(manifest["command"] == "pipeline");
  CHECK(manifest["config"]["pooling"]["mode"] == "hard");
  CHECK(manifest["seeds"].contains("split"));

  // Re-running with identical flags reproduces features and metrics exactly.
  const auto again = (dir / "again").string();
  CHECK(run(concat({"pipeline", "--out-dir", again}, small_data())) == 0);
  CHECK(slurp(fs::path(out) / "features.csv") == slurp(fs::path(again) / "features.csv"));
  CHECK(slurp(fs::path(out) / "metrics.json") == slurp(fs::path(again) / "metrics.json"));
}

TEST_CASE("pipeline: dataset files and kernel file as inputs") {
  const auto dir = oracle::temp_dir("cli_pipeline_files");
  const auto prefix = (dir / "d").string();
  CHECK(run({"synth", "--n-samples", "30", "--channels", "4", "--timesteps", "200", "--out-prefix", prefix}) == 0);
  const auto kernels = (dir / "k.json").string();
  CHECK(run({"gen-kernels", "--num-kernels", "50", "--input-length", "200", "--channels", "4", "--out", kernels}) == 0);
  CHECK(run({"pipeline", "--data", prefix + ".rkds", "--labels", prefix + ".labels.csv", "--kernels", kernels,
             "--pooling", "soft", "--lambda", "8", "--out-dir", (dir / "run").string()}) == 0);
  CHECK(read_json(dir / "run" / "metrics.json")["n_features"] == 100);

  const auto wrong = (dir / "wrong.json").string();
  CHECK(run({"gen-kernels", "--num-kernels", "5", "--input-length", "200", "--channels", "3", "--out", wrong}) == 0);
  CHECK(run({"pipeline", "--data", prefix + ".rkds", "--labels", prefix + ".labels.csv", "--kernels", wrong,
             "--out-dir", (dir / "bad").string()}) == kExitRuntime);
  CHECK(run({"pipeline", "--data", prefix + ".rkds", "--out-dir", (dir / "bad").string()}) == kExitUsage);
}

TEST_CASE("pipeline: degenerate split and bad pooling flags are usage errors") {
  const auto dir = oracle::temp_dir("cli_pipeline_bad");
  CHECK(run(concat({"pipeline", "--train-test-split", "1.0", "--out-dir", dir.string()}, small_data())) == kExitUsage);
  CHECK(run(concat({"pipeline", "--train-test-split", "0", "--out-dir", dir.string()}, small_data())) == kExitUsage);
  CHECK(run(concat({"pipeline", "--pooling", "median", "--out-dir", dir.string()}, small_data())) == kExitUsage);
  CHECK(run(concat({"pipeline", "--lambda", "-1", "--out-dir", dir.string()}, small_data())) == kExitUsage);
  CHECK(run(small_data()) == kExitUsage);
}

TEST_CASE("pipeline: worker count falls back to ROCKET_FORGE_WORKERS") {
  const auto dir = oracle::temp_dir("cli_workers");
  ::setenv("ROCKET_FORGE_WORKERS", "3", 1);
  CHECK(run(concat({"pipeline", "--out-dir", dir.string()}, small_data())) == 0);
  ::unsetenv("ROCKET_FORGE_WORKERS");
  CHECK(read_json(dir / "manifest.json")["config"]["workers"] == 3);
  CHECK(run(concat({"--workers", "2", "pipeline", "--out-dir", dir.string()}, small_data())) == 0);
  CHECK(read_json(dir / "manifest.json")["config"]["workers"] == 2);
}

TEST_CASE("lambda-sweep: default sweep has 9 lambdas plus the hard row") {
  const auto dir = oracle::temp_dir("cli_sweep");
  CHECK(run(concat({"lambda-sweep", "--out-dir", dir.string()}, small_data())) == 0);
  std::ifstream in(dir / "lambda_sweep.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "lambda,test_mse");
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    if (!line.empty()) labels.push_back(line.substr(0, line.find(',')));
  }
  CHECK(labels == std::vector<std::string>{"1", "2", "3", "4", "8", "16", "64", "256", "1000", "hard"});
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("bench: rows per batch size, bad flags, sizing refusal") {
  const auto dir = oracle::temp_dir("cli_bench");
  const std::vector<std::string> tiny{"--num-kernels", "20", "--channels", "2", "--timesteps", "64",
                                      "--repeats", "1", "--warmup", "0"};
  const auto csv = (dir / "r.csv").string();
  CHECK(run(concat({"bench", "--batch-sizes", "1,8,64", "--out", csv}, tiny)) == 0);
  CHECK(fs::exists(dir / "r.json"));
  CHECK(fs::exists(dir / "r.manifest.json"));
  std::ifstream in(csv);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == 3);

  CHECK(run(concat({"bench", "--batch-sizes", "1,x", "--out", csv}, tiny)) == kExitUsage);
  CHECK(run(concat({"bench", "--batch-sizes", "0", "--out", csv}, tiny)) == kExitUsage);
  CHECK(run({"bench", "--batch-sizes", "100000", "--memory-budget-mb", "1", "--out", csv}) == kExitRuntime);
}

TEST_CASE("stratified_split: sizes, coverage, one test example per label stratum") {
  std::vector<double> labels(200);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = std::sin(static_cast<double>(i) * 1.7) * 3.0;
  const auto s = stratified_split(labels, 0.9, 11);
  CHECK(s.test.size() == 20);
  CHECK(s.train.size() == 180);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return labels[a] < labels[b]; });
  for (std::size_t stratum = 0; stratum < 20; ++stratum) {
    int hits = 0;
    for (std::size_t r = stratum * 10; r < stratum * 10 + 10; ++r) {
      hits += std::binary_search(s.test.begin(), s.test.end(), order[r]) ? 1 : 0;
    }
    CHECK(hits == 1);
  }
  CHECK(stratified_split(labels, 0.9, 11).test == s.test);
  CHECK_FALSE(stratified_split(labels, 0.9, 12).test == s.test);
  CHECK(stratified_split(std::vector<double>{1, 2, 3}, 0.99, 0).test.size() == 1);
}
