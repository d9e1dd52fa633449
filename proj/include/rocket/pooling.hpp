#pragma once

#include <cmath>
#include <span>

namespace rocket {

enum class PoolingMode { kHard, kSoft };

struct PoolingConfig {
  PoolingMode mode = PoolingMode::kHard;
  float lambda = 1.0f;
  float shift = 3.0f;
  bool include_max = true;

  static PoolingConfig hard(bool include_max = true) {
    return {PoolingMode::kHard, 1.0f, 3.0f, include_max};
  }
  static PoolingConfig soft(float lambda, float shift = 3.0f, bool include_max = true) {
    return {PoolingMode::kSoft, lambda, shift, include_max};
  }

  // Throws ParameterError when soft mode has a non-positive lambda.
  void validate() const;

  bool operator==(const PoolingConfig&) const = default;
};

// Logistic sigmoid, evaluated so exp() only ever sees a non-positive argument.
inline float stable_sigmoid(float x) {
  if (x >= 0.0f) {
    const float e = std::exp(-x);
    return 1.0f / (1.0f + e);
  }
  const float e = std::exp(x);
  return e / (1.0f + e);
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Proportion of strictly positive values. H(0) = 0.
float ppv(std::span<const float> v);

/// Mean of sigmoid(lambda * v_i - shift), summed left to right in float.
float soft_ppv(std::span<const float> v, float lambda, float shift = 3.0f);

float max_pool(std::span<const float> v);

/// Analytic gradient of soft_ppv with respect to each input, in double:
/// (lambda / n) * s * (1 - s) with s = sigmoid(lambda * v_i - shift).
void soft_ppv_gradient(std::span<const double> v, double lambda, double shift,
                       std::span<double> out);

/// soft_ppv evaluated in double precision (used for derivative checks).
double soft_ppv_f64(std::span<const double> v, double lambda, double shift);

}  // namespace rocket
