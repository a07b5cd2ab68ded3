#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avqoe/dataset.hpp"
#include "avqoe/matrix.hpp"
#include "avqoe/random.hpp"

namespace avqoe {

struct MlpConfig {
  std::optional<std::size_t> hidden_units;  // input dimension when empty
  double learning_rate = 0.02;
  std::size_t iterations = 100;
  std::uint64_t seed = 0;
  double init_scale = 0.1;

  void validate() const {
    if (hidden_units && *hidden_units < 1) throw Error(ErrorCode::InvalidConfig, "hidden_units must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
    if (iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale))
      throw Error(ErrorCode::InvalidConfig, "init_scale must be >= 0");
  }
};

/// Per-feature z-scoring fitted on training data. Zero-variance features map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols(), 0.0);
    s.stddev.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) sum += x(r, c);
      const double m = sum / n;
      double ss = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - m) * (x(r, c) - m);
      s.mean[c] = m;
      s.stddev[c] = std::sqrt(ss / n);
    }
    return s;
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < in.size(); ++c) out[c] = stddev[c] > 0.0 ? (in[c] - mean[c]) / stddev[c] : 0.0;
  }

  [[nodiscard]] Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) apply(x.row(r), out.row(r));
    return out;
  }
};

/// Single hidden layer, tanh hidden units, linear output.
/// w1 is inputs x hidden, row-major: w1[i * hidden + j] connects input i to unit j.
struct MlpParameters {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  static MlpParameters zeros(std::size_t inputs, std::size_t hidden) {
    return {inputs, hidden, std::vector<double>(inputs * hidden, 0.0), std::vector<double>(hidden, 0.0),
            std::vector<double>(hidden, 0.0), 0.0};
  }

  [[nodiscard]] std::size_t size() const { return w1.size() + b1.size() + w2.size() + 1; }

  /// Parameters in the order w1, b1, w2, b2.
  [[nodiscard]] std::vector<double> flatten() const {
    std::vector<double> flat;
    flat.reserve(size());
    flat.insert(flat.end(), w1.begin(), w1.end());
    flat.insert(flat.end(), b1.begin(), b1.end());
    flat.insert(flat.end(), w2.begin(), w2.end());
    flat.push_back(b2);
    return flat;
  }

  void assign(std::span<const double> flat) {
    if (flat.size() != size()) throw Error(ErrorCode::DimensionalityMismatch, "parameter vector has wrong length");
    auto it = flat.begin();
    for (auto& v : w1) v = *it++;
    for (auto& v : b1) v = *it++;
    for (auto& v : w2) v = *it++;
    b2 = *it;
  }

  [[nodiscard]] bool finite() const {
    for (double v : flatten())
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Output for an already standardized input.
  [[nodiscard]] double forward(std::span<const double> z) const {
    double out = b2;
    for (std::size_t j = 0; j < hidden; ++j) {
      double a = b1[j];
      for (std::size_t i = 0; i < inputs; ++i) a += w1[i * hidden + j] * z[i];
      out += w2[j] * std::tanh(a);
    }
    return out;
  }
};

struct LossGradient {
  double loss = 0.0;
  MlpParameters gradient;
};

/// Mean squared error over standardized inputs and its exact gradient (backpropagation).
inline LossGradient mlp_loss_gradient(const MlpParameters& p, const Matrix& z, std::span<const double> y) {
  const std::size_t n = z.rows();
  const std::size_t h = p.hidden;
  LossGradient out{0.0, MlpParameters::zeros(p.inputs, h)};
  auto& g = out.gradient;
  std::vector<double> act(h);
  for (std::size_t r = 0; r < n; ++r) {
    auto x = z.row(r);
    double pred = p.b2;
    for (std::size_t j = 0; j < h; ++j) {
      double a = p.b1[j];
      for (std::size_t i = 0; i < p.inputs; ++i) a += p.w1[i * h + j] * x[i];
      act[j] = std::tanh(a);
      pred += p.w2[j] * act[j];
    }
    const double err = pred - y[r];
    out.loss += err * err;
    const double delta = 2.0 * err / static_cast<double>(n);
    g.b2 += delta;
    for (std::size_t j = 0; j < h; ++j) {
      g.w2[j] += delta * act[j];
      const double pre = delta * p.w2[j] * (1.0 - act[j] * act[j]);
      g.b1[j] += pre;
      for (std::size_t i = 0; i < p.inputs; ++i) g.w1[i * h + j] += pre * x[i];
    }
  }
  out.loss /= static_cast<double>(n);
  return out;
}

class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(MlpConfig config, std::vector<std::string> feature_names, Standardizer scaler, MlpParameters params,
           std::vector<double> loss_history = {})
      : config_(std::move(config)),
        feature_names_(std::move(feature_names)),
        scaler_(std::move(scaler)),
        params_(std::move(params)),
        loss_history_(std::move(loss_history)) {}

  [[nodiscard]] const MlpConfig& config() const { return config_; }
  [[nodiscard]] const std::vector<std::string>& feature_names() const { return feature_names_; }
  [[nodiscard]] const Standardizer& scaler() const { return scaler_; }
  [[nodiscard]] const MlpParameters& parameters() const { return params_; }
  [[nodiscard]] std::size_t dimension() const { return params_.inputs; }
  /// Training MSE before each update, followed by the final MSE.
  [[nodiscard]] const std::vector<double>& loss_history() const { return loss_history_; }

  [[nodiscard]] double predict(std::span<const double> x) const {
    if (x.size() != dimension())
      throw Error(ErrorCode::DimensionalityMismatch,
                  "expected " + std::to_string(dimension()) + " features, got " + std::to_string(x.size()));
    std::vector<double> z(x.size());
    scaler_.apply(x, z);
    return params_.forward(z);
  }

  [[nodiscard]] std::vector<double> predict(const Matrix& x) const {
    std::vector<double> out;
    out.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i)));
    return out;
  }

 private:
  MlpConfig config_;
  std::vector<std::string> feature_names_;
  Standardizer scaler_;
  MlpParameters params_;
  std::vector<double> loss_history_;
};

/// Uniform draw in [-scale, scale] for every parameter, in flatten() order.
inline MlpParameters init_mlp_parameters(std::size_t inputs, std::size_t hidden, double scale, std::uint64_t seed) {
  auto p = MlpParameters::zeros(inputs, hidden);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> flat(p.size());
  for (auto& v : flat) v = scale > 0.0 ? u(rng) : 0.0;
  p.assign(flat);
  return p;
}

/// Full-batch gradient descent on MSE for a fixed number of steps.
inline MlpModel train_mlp(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
                          const MlpConfig& config) {
  config.validate();
  if (x.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot train an MLP on zero rows");
  if (y.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "feature rows and targets differ in length");
  if (feature_names.size() != x.cols())
    throw Error(ErrorCode::DimensionalityMismatch, "feature name count does not match matrix width");

  auto scaler = Standardizer::fit(x);
  const Matrix z = scaler.apply(x);
  const std::size_t hidden = config.hidden_units.value_or(x.cols());
  auto params = init_mlp_parameters(x.cols(), hidden, config.init_scale, config.seed);

  std::vector<double> history;
  history.reserve(config.iterations + 1);
  auto flat = params.flatten();
  for (std::size_t it = 0; it < config.iterations; ++it) {
    auto [loss, grad] = mlp_loss_gradient(params, z, y);
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "loss diverged at iteration " + std::to_string(it));
    history.push_back(loss);
    auto g = grad.flatten();
    for (std::size_t k = 0; k < flat.size(); ++k) flat[k] -= config.learning_rate * g[k];
    params.assign(flat);
  }
  const double final_loss = mlp_loss_gradient(params, z, y).loss;
  if (!std::isfinite(final_loss) || !params.finite())
    throw Error(ErrorCode::NonFiniteLoss, "loss diverged after the final update");
  history.push_back(final_loss);
  return MlpModel(config, std::move(feature_names), std::move(scaler), std::move(params), std::move(history));
}

inline MlpModel train_mlp(const Dataset& dataset, const MlpConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot train an MLP on an empty dataset");
  auto y = dataset.targets();
  return train_mlp(dataset.features(), y, dataset.feature_names(), config);
}

inline double predict_mlp(const MlpModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace avqoe
