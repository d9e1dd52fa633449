#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "oracles.hpp"
#include "rocket/errors.hpp"
#include "rocket/kernelgen.hpp"

using namespace rocket;

TEST_CASE("generate_kernels: full-size bank has 10,000 kernels of length 7, 9 or 11") {
  const auto set = generate_kernels(7, 10000, 50000, 20);
  CHECK(set.count() == 10000);
  for (const auto& k : set.kernels()) {
    CHECK((k.length == 7 || k.length == 9 || k.length == 11));
  }
  CHECK(set.num_channels() == 20);
  CHECK(set.input_length_hint() == 50000);
}

TEST_CASE("generate_kernels: zero kernels gives an empty set") {
  const auto set = generate_kernels(1, 0, 100, 1);
  CHECK(set.count() == 0);
  CHECK(set.empty());
}

TEST_CASE("generate_kernels: univariate kernels use channel 0 and fit the series") {
  const auto set = generate_kernels(3, 1000, 512, 1);
  for (const auto& k : set.kernels()) {
    REQUIRE(k.channel_indices == std::vector<int>{0});
    CHECK((k.length - 1) * k.dilation <= 511);
  }
}

TEST_CASE("generate_kernels: every generated kernel satisfies the kernel invariants") {
  for (int channels : {1, 3, 20}) {
    const auto set = generate_kernels(11, 2000, 300, channels);
    for (std::size_t i = 0; i < set.count(); ++i) {
      CHECK_NOTHROW(validate_kernel(set[i], i, channels, 300));
      const auto& k = set[i];
      CHECK(k.weights.size() == k.channel_indices.size() * static_cast<std::size_t>(k.length));
      CHECK((k.padding == 0 || k.padding == (k.length - 1) * k.dilation / 2));
    }
  }
}

TEST_CASE("generate_kernels: reproducible and seed-sensitive") {
  CHECK(generate_kernels(42, 500, 1000, 8) == generate_kernels(42, 500, 1000, 8));
  CHECK_FALSE(generate_kernels(42, 500, 1000, 8) == generate_kernels(43, 500, 1000, 8));
}

TEST_CASE("generate_kernels: channel counts span 1..C") {
  const auto set = generate_kernels(5, 5000, 200, 16);
  std::map<std::size_t, int> counts;
  for (const auto& k : set.kernels()) ++counts[k.channel_indices.size()];
  CHECK(counts.begin()->first == 1);
  CHECK(counts.rbegin()->first <= 16);
  CHECK(counts.rbegin()->first >= 12);
}

TEST_CASE("generate_kernels: dilations reach the top of the exponential range") {
  const auto set = generate_kernels(9, 5000, 2000, 1);
  int max_span = 0;
  for (const auto& k : set.kernels()) max_span = std::max(max_span, k.span());
  CHECK(max_span > 1000);
  CHECK(max_span <= 1999);
}

TEST_CASE("generate_kernels: parameter errors") {
  CHECK_THROWS_AS(generate_kernels(0, 10, 100, 0), ParameterError);
  CHECK_THROWS_AS(generate_kernels(0, 10, 10, 1), ParameterError);
  CHECK_THROWS_AS(generate_kernels(0, -1, 100, 1), ParameterError);
  CHECK_NOTHROW(generate_kernels(0, 10, 11, 1));
}

TEST_CASE("save/load: round trip is bit-exact and preserves order") {
  const auto dir = oracle::temp_dir("kernels");
  const auto set = generate_kernels(123, 300, 700, 6);
  save_kernels(set, dir / "k.json");
  const auto loaded = load_kernels(dir / "k.json");
  CHECK(loaded == set);
  for (std::size_t i = 0; i < set.count(); ++i) {
    for (std::size_t w = 0; w < set[i].weights.size(); ++w) {
      CHECK(std::bit_cast<std::uint32_t>(loaded[i].weights[w]) == std::bit_cast<std::uint32_t>(set[i].weights[w]));
    }
  }

  const auto three = generate_kernels(5, 3, 100, 2);
  save_kernels(three, dir / "three.json");
  std::ifstream in(dir / "three.json");
  const auto doc = nlohmann::json::parse(in);
  REQUIRE(doc["kernels"].size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(doc["kernels"][i]["dilation"].get<int>() == three[i].dilation);
    CHECK(doc["kernels"][i]["bias"].get<float>() == three[i].bias);
  }
  CHECK(doc["format_version"] == 1);
}

TEST_CASE("save/load: empty set writes kernels: []") {
  const auto dir = oracle::temp_dir("kernels_empty");
  save_kernels(generate_kernels(1, 0, 100, 1), dir / "e.json");
  std::ifstream in(dir / "e.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["kernels"].is_array());
  CHECK(doc["kernels"].empty());
  CHECK(load_kernels(dir / "e.json").count() == 0);
}

namespace {

nlohmann::json valid_doc() {
  return {{"format_version", 1},
          {"seed", 0},
          {"num_channels", 3},
          {"input_length_hint", 100},
          {"kernels",
           {{{"length", 7},
             {"dilation", 2},
             {"padding", 6},
             {"bias", 0.25},
             {"channel_indices", {0, 2}},
             {"weights", {1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.5, -0.5}}},
            {{"length", 9},
             {"dilation", 1},
             {"padding", 0},
             {"bias", -0.5},
             {"channel_indices", {1}},
             {"weights", {1, -1, 0, 0, 0, 0, 0, 0, 0}}}}}};
}

void expect_format_error(const nlohmann::json& doc, const std::string& needle) {
  const auto dir = oracle::temp_dir("kernels_bad");
  std::ofstream(dir / "bad.json") << doc.dump();
  try {
    load_kernels(dir / "bad.json");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("load_kernels: accepts a hand-written valid file") {
  const auto dir = oracle::temp_dir("kernels_ok");
  std::ofstream(dir / "ok.json") << valid_doc().dump();
  const auto set = load_kernels(dir / "ok.json");
  CHECK(set.count() == 2);
  CHECK(set[0].channel_indices == std::vector<int>{0, 2});
}

TEST_CASE("load_kernels: invariant violations name the kernel index") {
  auto doc = valid_doc();
  doc["kernels"][1]["bias"] = 1.5;
  expect_format_error(doc, "kernel 1");

  doc = valid_doc();
  doc["kernels"][0]["channel_indices"] = {2, 2};
  expect_format_error(doc, "kernel 0");

  doc = valid_doc();
  doc["kernels"][0]["weights"][0] = 3.0;
  expect_format_error(doc, "mean-centred");

  doc = valid_doc();
  doc["kernels"][1]["length"] = 8;
  expect_format_error(doc, "kernel 1");

  doc = valid_doc();
  doc["kernels"][1]["dilation"] = 50;
  expect_format_error(doc, "receptive field");

  doc = valid_doc();
  doc["kernels"][0]["padding"] = 2;
  expect_format_error(doc, "padding");

  doc = valid_doc();
  doc["kernels"][0].erase("weights");
  expect_format_error(doc, "kernel 0");
}

TEST_CASE("load_kernels: malformed JSON and missing files") {
  const auto dir = oracle::temp_dir("kernels_malformed");
  std::ofstream(dir / "m.json") << "{\"format_version\": 1, \"kernels\": [";
  CHECK_THROWS_AS(load_kernels(dir / "m.json"), FormatError);
  CHECK_THROWS_AS(load_kernels(dir / "missing.json"), IoError);
}
