#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rocket/transform.hpp"

namespace rocket {

/// Linear model over standardized features:
///   y = intercept + sum_j weights[j] * (x_j - feature_means[j]) / feature_scales[j]
struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double alpha = 1.0;
  std::vector<double> feature_means;
  std::vector<double> feature_scales;
  // Mean squared leave-one-out error per candidate alpha, in candidate order.
  std::vector<double> loo_errors;

  std::size_t feature_count() const { return weights.size(); }
};

/// Slope and intercept in the original feature units.
struct RawCoefficients {
  std::vector<double> slopes;
  double intercept = 0.0;
};

RawCoefficients raw_coefficients(const RidgeModel& model);

/// 10 log-spaced values from 1e-3 to 1e3.
std::vector<double> default_alphas();

/// Dense row-major design matrix in double, used by fit and the test oracles.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

Design to_design(const FeatureMatrix& features);

/// Standardizes columns, then picks the alpha with the smallest exact
/// leave-one-out error (hat-matrix identity, unpenalized intercept) and solves
/// the ridge normal equations on the smaller of the F x F and N x N Gram
/// matrices. Ties between alphas go to the earlier candidate.
RidgeModel fit(const Design& design, std::span<const double> labels,
               std::span<const double> alphas);
RidgeModel fit(const FeatureMatrix& features, std::span<const double> labels,
               std::span<const double> alphas);

std::vector<double> predict(const RidgeModel& model, const Design& design);
std::vector<double> predict(const RidgeModel& model, const FeatureMatrix& features);

double mse(std::span<const double> predicted, std::span<const double> actual);

void save_model(const RidgeModel& model, const std::filesystem::path& path);
RidgeModel load_model(const std::filesystem::path& path);

}  // namespace rocket
