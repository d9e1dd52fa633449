#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rocket/errors.hpp"
#include "rocket/pooling.hpp"

using namespace rocket;

TEST_CASE("ppv: counts strictly positive values") {
  CHECK(ppv(std::vector<float>{-1, -2, -3}) == 0.0f);
  CHECK(ppv(std::vector<float>{1, 2, 3, -1}) == 0.75f);
  CHECK(ppv(std::vector<float>{0, 1}) == 0.5f);
  CHECK_THROWS_AS(ppv(std::vector<float>{}), ParameterError);
}

TEST_CASE("soft_ppv: direct evaluations of the shifted sigmoid") {
  CHECK(soft_ppv(std::vector<float>{0}, 1.0f, 3.0f) == doctest::Approx(0.04742587317756678).epsilon(1e-6));
  CHECK(std::fabs(soft_ppv(std::vector<float>{10, -10}, 2.0f, 3.0f) - 0.4999999793516216) < 1e-6);
  CHECK_THROWS_AS(soft_ppv(std::vector<float>{}, 1.0f, 3.0f), ParameterError);
  CHECK_THROWS_AS(soft_ppv(std::vector<float>{1}, 0.0f, 3.0f), ParameterError);
  CHECK_THROWS_AS(soft_ppv(std::vector<float>{NAN}, 1.0f, 3.0f), ParameterError);
  CHECK_THROWS_AS(soft_ppv(std::vector<float>{INFINITY}, 1.0f, 3.0f), ParameterError);
}

TEST_CASE("soft_ppv: large lambda matches ppv when inputs avoid zero") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<float> mag(0.01f, 5.0f);
  std::bernoulli_distribution sign(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> v(1 + trial % 50);
    for (auto& x : v) x = sign(gen) ? mag(gen) : -mag(gen);
    CHECK(std::fabs(soft_ppv(v, 1000.0f, 3.0f) - ppv(v)) <= 1e-3);
  }
}

TEST_CASE("soft_ppv: extreme arguments stay finite") {
  const std::vector<float> v{1e30f, -1e30f, 3e38f, -3e38f};
  const float s = soft_ppv(v, 1e6f, 3.0f);
  CHECK(std::isfinite(s));
  CHECK(s == doctest::Approx(0.5));
  CHECK(stable_sigmoid(-1000.0f) == 0.0f);
  CHECK(stable_sigmoid(1000.0f) == 1.0f);
}

TEST_CASE("max_pool") {
  CHECK(max_pool(std::vector<float>{-5, -1, -9}) == -1.0f);
  CHECK(max_pool(std::vector<float>{3}) == 3.0f);
  CHECK(max_pool(std::vector<float>{1, 7, 7}) == 7.0f);
  CHECK_THROWS_AS(max_pool(std::vector<float>{}), ParameterError);
}

TEST_CASE("PoolingConfig validation") {
  CHECK_NOTHROW(PoolingConfig::hard().validate());
  CHECK_NOTHROW(PoolingConfig::soft(2.0f).validate());
  CHECK_THROWS_AS(PoolingConfig::soft(0.0f).validate(), ParameterError);
  CHECK_THROWS_AS(PoolingConfig::soft(-1.0f).validate(), ParameterError);
  const PoolingConfig d;
  CHECK(d.shift == 3.0f);
  CHECK(d.include_max);
}

TEST_CASE("property: convergence bound sigmoid(shift - lambda*delta)") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<float> mag(0.1f, 4.0f);
  std::uniform_int_distribution<int> len(1, 64);
  std::bernoulli_distribution sign(0.5);
  for (float lambda : {10.0f, 100.0f, 1000.0f}) {
    const double bound = oracle::sigmoid(3.0 - lambda * 0.1);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<float> v(static_cast<std::size_t>(len(gen)));
      for (auto& x : v) x = sign(gen) ? mag(gen) : -mag(gen);
      worst = std::max(worst, static_cast<double>(std::fabs(soft_ppv(v, lambda, 3.0f) - ppv(v))));
    }
    CAPTURE(lambda);
    // float accumulation adds at most a few ulps on top of the analytic bound
    CHECK(worst <= bound + 1e-6);
  }
}

TEST_CASE("property: ranges, permutation invariance and complement") {
  std::mt19937_64 gen(77);
  std::normal_distribution<float> normal(0.0f, 2.0f);
  std::uniform_int_distribution<int> len(1, 40);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<float> v(static_cast<std::size_t>(len(gen)));
    for (auto& x : v) x = normal(gen);
    if (trial % 5 == 0) v[0] = 0.0f;

    const float p = ppv(v);
    const float s = soft_ppv(v, 4.0f, 3.0f);
    CHECK(p >= 0.0f);
    CHECK(p <= 1.0f);
    CHECK(s > 0.0f);
    CHECK(s < 1.0f);

    auto shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(ppv(shuffled) == p);
    CHECK(std::fabs(soft_ppv(shuffled, 4.0f, 3.0f) - s) <= 1e-6f);

    std::vector<float> neg(v.size());
    std::transform(v.begin(), v.end(), neg.begin(), [](float x) { return -x; });
    const bool has_zero = std::find(v.begin(), v.end(), 0.0f) != v.end();
    if (has_zero) {
      CHECK(p + ppv(neg) < 1.0f);
    } else {
      CHECK(p + ppv(neg) == doctest::Approx(1.0f));
    }
  }
}

TEST_CASE("property: soft_ppv is monotone non-decreasing in each element") {
  std::mt19937_64 gen(5);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::uniform_real_distribution<float> bump(0.0f, 1.0f);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<float> v(8);
    for (auto& x : v) x = normal(gen);
    const float before = soft_ppv(v, 3.0f, 3.0f);
    v[static_cast<std::size_t>(trial % 8)] += bump(gen);
    CHECK(soft_ppv(v, 3.0f, 3.0f) >= before);
  }
}

TEST_CASE("property: analytic gradient matches central differences") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.5, 4.0);
  const double h = 1e-3;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + trial % 16);
    for (auto& x : v) x = normal(gen);
    const double lambda = lam(gen);
    std::vector<double> grad(v.size());
    soft_ppv_gradient(v, lambda, 3.0, grad);
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto up = v;
      auto down = v;
      up[i] += h;
      down[i] -= h;
      const double fd = (soft_ppv_f64(up, lambda, 3.0) - soft_ppv_f64(down, lambda, 3.0)) / (2 * h);
      CHECK(std::fabs(fd - grad[i]) <= 1e-3 * std::fabs(grad[i]));
    }
  }
}
