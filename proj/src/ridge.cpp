#include "rocket/ridge.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "rocket/errors.hpp"

namespace rocket {
namespace {

constexpr int kModelFormatVersion = 1;

struct Standardized {
  Eigen::MatrixXd x;               // N x active columns
  std::vector<std::size_t> active;  // original column of each active column
  std::vector<double> means;
  std::vector<double> scales;
};

Standardized standardize(const Design& design) {
  const std::size_t n = design.rows;
  const std::size_t f = design.cols;
  Standardized s;
  s.means.assign(f, 0.0);
  s.scales.assign(f, 1.0);
  for (std::size_t j = 0; j < f; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += design(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = design(i, j) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.means[j] = mean;
    if (sd > 1e-12 * std::max(1.0, std::fabs(mean))) {
      s.scales[j] = sd;
      s.active.push_back(j);
    }
  }
  s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s.active.size()));
  for (std::size_t a = 0; a < s.active.size(); ++a) {
    const std::size_t j = s.active[a];
    for (std::size_t i = 0; i < n; ++i) {
      s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) =
          (design(i, j) - s.means[j]) / s.scales[j];
    }
  }
  return s;
}

// Ridge solution for one alpha plus the diagonal of the centred hat matrix.
struct Solve {
  Eigen::VectorXd weights;
  Eigen::VectorXd fitted;
  Eigen::VectorXd leverage;
};

class RidgeSolver {
 public:
  RidgeSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) : x_(x), y_(y) {
    primal_ = x.cols() <= x.rows();
    if (primal_) {
      gram_ = x.transpose() * x;
      xty_ = x.transpose() * y;
    } else {
      gram_ = x * x.transpose();
    }
  }

  Solve solve(double alpha, bool with_leverage) const {
    const Eigen::Index n = x_.rows();
    Solve out;
    if (x_.cols() == 0) {
      out.weights = Eigen::VectorXd::Zero(0);
      out.fitted = Eigen::VectorXd::Zero(n);
      out.leverage = Eigen::VectorXd::Zero(n);
      return out;
    }
    Eigen::MatrixXd m = gram_;
    m.diagonal().array() += alpha;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw ParameterError("ridge system is not positive definite");

    if (primal_) {
      out.weights = llt.solve(xty_);
      out.fitted = x_ * out.weights;
      if (with_leverage) {
        const Eigen::MatrixXd a = llt.solve(x_.transpose());  // F x N
        out.leverage = (x_.array() * a.transpose().array()).rowwise().sum();
      }
    } else {
      const Eigen::VectorXd c = llt.solve(y_);
      out.weights = x_.transpose() * c;
      out.fitted = y_ - alpha * c;
      if (with_leverage) {
        const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        out.leverage = Eigen::VectorXd::Ones(n) - alpha * inv.diagonal();
      }
    }
    return out;
  }

 private:
  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  bool primal_ = true;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;
};

}  // namespace

std::vector<double> default_alphas() {
  std::vector<double> alphas;
  for (int i = 0; i < 10; ++i) alphas.push_back(std::pow(10.0, -3.0 + 6.0 * i / 9.0));
  return alphas;
}

Design to_design(const FeatureMatrix& features) {
  Design d;
  d.rows = features.rows();
  d.cols = features.cols();
  d.values.assign(features.values().begin(), features.values().end());
  return d;
}

RidgeModel fit(const Design& design, std::span<const double> labels,
               std::span<const double> alphas) {
  const std::size_t n = design.rows;
  if (n < 2) throw ParameterError("ridge fit needs at least 2 rows");
  if (labels.size() != n) throw ParameterError("label count does not match feature rows");
  if (design.values.size() != n * design.cols) throw ParameterError("design matrix size mismatch");
  if (alphas.empty()) throw ParameterError("alphas must be non-empty");
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("alphas must be finite and > 0");
  }
  for (double y : labels) {
    if (!std::isfinite(y)) throw ParameterError("labels must be finite");
  }
  for (double v : design.values) {
    if (!std::isfinite(v)) throw ParameterError("features must be finite");
  }

  const Standardized s = standardize(design);
  double y_mean = 0.0;
  for (double y : labels) y_mean += y;
  y_mean /= static_cast<double>(n);
  Eigen::VectorXd yc(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) yc(static_cast<Eigen::Index>(i)) = labels[i] - y_mean;

  const RidgeSolver solver(s.x, yc);
  RidgeModel model;
  model.intercept = y_mean;
  model.feature_means = s.means;
  model.feature_scales = s.scales;

  const double inv_n = 1.0 / static_cast<double>(n);
  std::size_t best = 0;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const Solve sol = solver.solve(alphas[a], true);
    double err = 0.0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      const double denom = 1.0 - (sol.leverage(i) + inv_n);
      const double e = denom > 1e-15 ? (yc(i) - sol.fitted(i)) / denom
                                     : std::numeric_limits<double>::infinity();
      err += e * e;
    }
    err *= inv_n;
    model.loo_errors.push_back(err);
    if (err < model.loo_errors[best]) best = a;
  }

  model.alpha = alphas[best];
  const Solve sol = solver.solve(model.alpha, false);
  model.weights.assign(design.cols, 0.0);
  for (std::size_t a = 0; a < s.active.size(); ++a) {
    model.weights[s.active[a]] = sol.weights(static_cast<Eigen::Index>(a));
  }
  return model;
}

RidgeModel fit(const FeatureMatrix& features, std::span<const double> labels,
               std::span<const double> alphas) {
  return fit(to_design(features), labels, alphas);
}

std::vector<double> predict(const RidgeModel& model, const Design& design) {
  if (design.cols != model.feature_count()) {
    throw ParameterError("feature count " + std::to_string(design.cols) + " does not match model's " +
                         std::to_string(model.feature_count()));
  }
  std::vector<double> out(design.rows, model.intercept);
  for (std::size_t i = 0; i < design.rows; ++i) {
    double acc = model.intercept;
    for (std::size_t j = 0; j < design.cols; ++j) {
      acc += model.weights[j] * (design(i, j) - model.feature_means[j]) / model.feature_scales[j];
    }
    out[i] = acc;
  }
  return out;
}

std::vector<double> predict(const RidgeModel& model, const FeatureMatrix& features) {
  return predict(model, to_design(features));
}

RawCoefficients raw_coefficients(const RidgeModel& model) {
  RawCoefficients raw;
  raw.intercept = model.intercept;
  raw.slopes.resize(model.feature_count());
  for (std::size_t j = 0; j < model.feature_count(); ++j) {
    raw.slopes[j] = model.weights[j] / model.feature_scales[j];
    raw.intercept -= raw.slopes[j] * model.feature_means[j];
  }
  return raw;
}

double mse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw ParameterError("mse: length mismatch");
  if (predicted.empty()) throw ParameterError("mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predicted.size());
}

void save_model(const RidgeModel& model, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["alpha"] = model.alpha;
  doc["intercept"] = model.intercept;
  doc["weights"] = model.weights;
  doc["feature_means"] = model.feature_means;
  doc["feature_scales"] = model.feature_scales;
  doc["loo_errors"] = model.loo_errors;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

RidgeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  RidgeModel m;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw FormatError(path.string() + ": unsupported format_version");
    }
    m.alpha = doc.at("alpha").get<double>();
    m.intercept = doc.at("intercept").get<double>();
    m.weights = doc.at("weights").get<std::vector<double>>();
    m.feature_means = doc.at("feature_means").get<std::vector<double>>();
    m.feature_scales = doc.at("feature_scales").get<std::vector<double>>();
    if (doc.contains("loo_errors")) m.loo_errors = doc["loo_errors"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (m.weights.size() != m.feature_means.size() || m.weights.size() != m.feature_scales.size()) {
    throw FormatError(path.string() + ": weights/means/scales lengths differ");
  }
  for (double s : m.feature_scales) {
    if (!(s > 0.0)) throw FormatError(path.string() + ": feature_scales must be positive");
  }
  if (!(m.alpha > 0.0)) throw FormatError(path.string() + ": alpha must be positive");
  return m;
}

}  // namespace rocket
