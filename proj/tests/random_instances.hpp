#pragma once

#include <cstdint>
#include <random>

#include "rocket/kernelgen.hpp"
#include "rocket/transform.hpp"

// Randomized desk-scale (batch, kernel set) instances for property tests.
struct Instance {
  rocket::TimeSeriesBatch batch;
  rocket::KernelSet kernels;
};

inline Instance random_instance(std::uint64_t seed, std::size_t max_n = 8, std::size_t max_c = 4,
                                std::size_t max_t = 256, int max_k = 64) {
  std::mt19937_64 gen(seed);
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_n)(gen);
  const auto c = std::uniform_int_distribution<std::size_t>(1, max_c)(gen);
  const auto t = std::uniform_int_distribution<std::size_t>(11, max_t)(gen);
  const auto k = std::uniform_int_distribution<int>(1, max_k)(gen);
  rocket::TimeSeriesBatch batch(n, c, t);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (auto& v : batch.data()) v = normal(gen);
  return {std::move(batch), rocket::generate_kernels(seed * 31 + 7, k, static_cast<int>(t), static_cast<int>(c))};
}
