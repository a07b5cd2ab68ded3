#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "avqoe/dataset.hpp"
#include "avqoe/matrix.hpp"
#include "avqoe/random.hpp"

namespace avqoe {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;           // unlimited when empty
  std::optional<std::size_t> features_per_split;  // all features when empty
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // results do not depend on this

  void validate(std::size_t dimension) const {
    if (n_trees < 1) throw Error(ErrorCode::InvalidConfig, "n_trees must be >= 1");
    if (features_per_split && (*features_per_split < 1 || *features_per_split > dimension))
      throw Error(ErrorCode::InvalidConfig, "features_per_split must lie in [1, d]");
    if (threads < 1) throw Error(ErrorCode::InvalidConfig, "threads must be >= 1");
  }
};

/// CART regression tree stored as a flat node array; node 0 is the root.
struct RegressionTree {
  static constexpr std::int32_t kLeaf = -1;

  struct Node {
    std::int32_t feature = kLeaf;
    double threshold = 0.0;  // go left when x[feature] <= threshold
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;               // mean target of the node's samples
    double impurity_decrease = 0.0;   // (SSE_node - SSE_left - SSE_right) / root sample count
    std::uint32_t n_samples = 0;

    [[nodiscard]] bool is_leaf() const { return feature == kLeaf; }
  };

  std::vector<Node> nodes;

  [[nodiscard]] double predict(std::span<const double> x) const {
    std::uint32_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[i].value;
  }

  [[nodiscard]] std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
  }
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const ForestConfig& config, Rng& rng)
      : x_(x), y_(y), config_(config), rng_(rng), features_(x.cols()) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  RegressionTree build(std::vector<std::size_t> samples) {
    root_count_ = static_cast<double>(samples.size());
    RegressionTree tree;
    grow(tree, samples, 0);
    return tree;
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0;
  };

  std::uint32_t grow(RegressionTree& tree, std::span<std::size_t> samples, std::size_t depth) {
    const auto id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    double sum = 0.0, lo = y_[samples[0]], hi = lo;
    for (auto s : samples) {
      sum += y_[s];
      lo = std::min(lo, y_[s]);
      hi = std::max(hi, y_[s]);
    }
    const double n = static_cast<double>(samples.size());
    {
      auto& node = tree.nodes[id];
      node.n_samples = static_cast<std::uint32_t>(samples.size());
      node.value = lo == hi ? lo : std::clamp(sum / n, lo, hi);
    }

    const bool depth_limited = config_.max_depth && depth >= *config_.max_depth;
    if (samples.size() < 2 || lo == hi || depth_limited) return id;

    const double mean = sum / n;
    double sse = 0.0;
    for (auto s : samples) sse += (y_[s] - mean) * (y_[s] - mean);

    auto split = find_split(samples, sum);
    if (!split || split->decrease <= 1e-12 * sse) return id;

    auto middle = std::stable_partition(samples.begin(), samples.end(), [&](std::size_t s) {
      return x_(s, split->feature) <= split->threshold;
    });
    const auto n_left = static_cast<std::size_t>(middle - samples.begin());

    const auto left = grow(tree, samples.first(n_left), depth + 1);
    const auto right = grow(tree, samples.subspan(n_left), depth + 1);
    auto& node = tree.nodes[id];
    node.feature = static_cast<std::int32_t>(split->feature);
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    node.impurity_decrease = std::max(0.0, split->decrease) / root_count_;
    return id;
  }

  std::span<const std::size_t> candidate_features() {
    if (!config_.features_per_split || *config_.features_per_split >= x_.cols()) return features_;
    const std::size_t m = *config_.features_per_split;
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, features_.size() - 1);
      std::swap(features_[i], features_[pick(rng_)]);
    }
    std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(m));
    return std::span<const std::size_t>(features_).first(m);
  }

  // Maximizes sum_l^2/n_l + sum_r^2/n_r, which is equivalent to minimizing child SSE.
  // Strict improvement keeps the lowest feature index, then the lowest threshold.
  std::optional<Split> find_split(std::span<const std::size_t> samples, double total) {
    const double n = static_cast<double>(samples.size());
    const double parent = total * total / n;
    std::optional<Split> best;
    double best_score = parent;
    order_.assign(samples.begin(), samples.end());
    for (std::size_t f : candidate_features()) {
      std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        const double xa = x_(a, f), xb = x_(b, f);
        return xa < xb || (xa == xb && a < b);
      });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < order_.size(); ++i) {
        left_sum += y_[order_[i]];
        const double xa = x_(order_[i], f), xb = x_(order_[i + 1], f);
        if (!(xa < xb)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
        if (score > best_score) {
          best_score = score;
          double t = xa + (xb - xa) / 2.0;
          if (!(t < xb)) t = xa;
          best = Split{f, t, 0.0};
        }
      }
    }
    if (best) best->decrease = best_score - parent;
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const ForestConfig& config_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> order_;
  double root_count_ = 1.0;
};

}  // namespace detail

/// Fits one tree on the given sample indices (duplicates allowed, as in a bootstrap draw).
inline RegressionTree fit_tree(const Matrix& x, std::span<const double> y, std::vector<std::size_t> samples,
                               const ForestConfig& config, Rng& rng) {
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "tree needs at least one sample");
  return detail::TreeBuilder(x, y, config, rng).build(std::move(samples));
}

struct FeatureImportance {
  std::string feature;
  double importance = 0.0;
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(ForestConfig config, std::vector<std::string> feature_names, std::vector<RegressionTree> trees,
              double target_min, double target_max)
      : config_(std::move(config)),
        feature_names_(std::move(feature_names)),
        trees_(std::move(trees)),
        target_min_(target_min),
        target_max_(target_max) {}

  [[nodiscard]] const ForestConfig& config() const { return config_; }
  [[nodiscard]] const std::vector<std::string>& feature_names() const { return feature_names_; }
  [[nodiscard]] const std::vector<RegressionTree>& trees() const { return trees_; }
  [[nodiscard]] std::size_t dimension() const { return feature_names_.size(); }
  [[nodiscard]] double target_min() const { return target_min_; }
  [[nodiscard]] double target_max() const { return target_max_; }

  /// Mean of the per-tree leaf values. Tree outputs are summed in sorted order,
  /// so the result does not depend on tree order.
  [[nodiscard]] double predict(std::span<const double> x) const {
    if (x.size() != dimension())
      throw Error(ErrorCode::DimensionalityMismatch,
                  "expected " + std::to_string(dimension()) + " features, got " + std::to_string(x.size()));
    if (trees_.empty()) throw Error(ErrorCode::InvalidModel, "forest has no trees");
    std::vector<double> outputs;
    outputs.reserve(trees_.size());
    for (const auto& t : trees_) outputs.push_back(t.predict(x));
    std::sort(outputs.begin(), outputs.end());
    double sum = 0.0;
    for (double v : outputs) sum += v;
    return std::clamp(sum / static_cast<double>(outputs.size()), target_min_, target_max_);
  }

  [[nodiscard]] std::vector<double> predict(const Matrix& x) const {
    std::vector<double> out;
    out.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i)));
    return out;
  }

  /// Mean decrease in impurity, averaged over trees and normalized to sum to one.
  /// All zeros when no tree ever split (constant targets).
  [[nodiscard]] std::vector<FeatureImportance> feature_importance() const {
    std::vector<double> total(dimension(), 0.0);
    for (const auto& tree : trees_) {
      std::vector<double> per_tree(dimension(), 0.0);
      for (const auto& node : tree.nodes)
        if (!node.is_leaf()) per_tree[static_cast<std::size_t>(node.feature)] += node.impurity_decrease;
      for (std::size_t f = 0; f < dimension(); ++f) total[f] += per_tree[f];
    }
    double sum = 0.0;
    for (auto& v : total) {
      v /= static_cast<double>(std::max<std::size_t>(trees_.size(), 1));
      sum += v;
    }
    std::vector<FeatureImportance> out;
    out.reserve(dimension());
    for (std::size_t f = 0; f < dimension(); ++f)
      out.push_back({feature_names_[f], sum > 0.0 ? total[f] / sum : 0.0});
    return out;
  }

 private:
  ForestConfig config_;
  std::vector<std::string> feature_names_;
  std::vector<RegressionTree> trees_;
  double target_min_ = 0.0;
  double target_max_ = 0.0;
};

inline ForestModel train_forest(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
                                const ForestConfig& config) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot train a forest on zero rows");
  if (y.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "feature rows and targets differ in length");
  if (feature_names.size() != x.cols())
    throw Error(ErrorCode::DimensionalityMismatch, "feature name count does not match matrix width");
  if (x.cols() == 0) throw Error(ErrorCode::DimensionalityMismatch, "forest needs at least one feature");
  config.validate(x.cols());

  const std::size_t n = x.rows();
  std::vector<RegressionTree> trees(config.n_trees);
  auto build_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng(derive_seed(config.seed, t));
      std::vector<std::size_t> samples(n);
      if (config.bootstrap) {
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        for (auto& s : samples) s = draw(rng);
      } else {
        std::iota(samples.begin(), samples.end(), std::size_t{0});
      }
      trees[t] = fit_tree(x, y, std::move(samples), config, rng);
    }
  };

  const std::size_t workers = std::min(config.threads, config.n_trees);
  if (workers <= 1) {
    build_range(0, config.n_trees);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (config.n_trees + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk, end = std::min(config.n_trees, begin + chunk);
      if (begin < end) pool.emplace_back(build_range, begin, end);
    }
  }

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return ForestModel(config, std::move(feature_names), std::move(trees), *lo, *hi);
}

inline ForestModel train_forest(const Dataset& dataset, const ForestConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot train a forest on an empty dataset");
  auto y = dataset.targets();
  return train_forest(dataset.features(), y, dataset.feature_names(), config);
}

inline double predict_forest(const ForestModel& model, std::span<const double> x) { return model.predict(x); }

inline std::vector<FeatureImportance> feature_importance(const ForestModel& model) {
  return model.feature_importance();
}

}  // namespace avqoe
