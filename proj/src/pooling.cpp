#include "rocket/pooling.hpp"

#include <cmath>
#include <string>

#include "rocket/errors.hpp"

namespace rocket {
namespace {

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw ParameterError(std::string(what) + ": empty input");
}

}  // namespace

void PoolingConfig::validate() const {
  if (mode == PoolingMode::kSoft && !(lambda > 0.0f && std::isfinite(lambda))) {
    throw ParameterError("soft pooling requires a finite lambda > 0");
  }
  if (!std::isfinite(shift)) throw ParameterError("pooling shift must be finite");
}

float ppv(std::span<const float> v) {
  require_nonempty(v.size(), "ppv");
  std::size_t positive = 0;
  for (float x : v) positive += x > 0.0f ? 1 : 0;
  return static_cast<float>(positive) / static_cast<float>(v.size());
}

float soft_ppv(std::span<const float> v, float lambda, float shift) {
  require_nonempty(v.size(), "soft_ppv");
  if (!(lambda > 0.0f) || !std::isfinite(lambda)) {
    throw ParameterError("soft_ppv: lambda must be finite and > 0");
  }
  float sum = 0.0f;
  for (float x : v) {
    if (!std::isfinite(x)) throw ParameterError("soft_ppv: non-finite input");
    sum += stable_sigmoid(lambda * x - shift);
  }
  return sum / static_cast<float>(v.size());
}

float max_pool(std::span<const float> v) {
  require_nonempty(v.size(), "max_pool");
  float best = v[0];
  for (float x : v.subspan(1)) best = x > best ? x : best;
  return best;
}

double soft_ppv_f64(std::span<const double> v, double lambda, double shift) {
  require_nonempty(v.size(), "soft_ppv");
  double sum = 0.0;
  for (double x : v) sum += stable_sigmoid(lambda * x - shift);
  return sum / static_cast<double>(v.size());
}

void soft_ppv_gradient(std::span<const double> v, double lambda, double shift,
                       std::span<double> out) {
  require_nonempty(v.size(), "soft_ppv_gradient");
  if (out.size() != v.size()) throw ParameterError("soft_ppv_gradient: output size mismatch");
  const double scale = lambda / static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = stable_sigmoid(lambda * v[i] - shift);
    out[i] = scale * s * (1.0 - s);
  }
}

}  // namespace rocket
