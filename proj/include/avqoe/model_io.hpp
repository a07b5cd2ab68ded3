#pragma once

#include <fstream>
#include <string>
#include <variant>

#include "avqoe/forest.hpp"
#include "avqoe/mlp.hpp"
#include "json.hpp"

namespace avqoe {

using json = nlohmann::json;

inline constexpr std::string_view kModelFormat = "avqoe-model";
inline constexpr int kModelFormatVersion = 1;

using Model = std::variant<ForestModel, MlpModel>;

inline json to_json(const ForestConfig& c) {
  json j;
  j["n_trees"] = c.n_trees;
  j["max_depth"] = c.max_depth ? json(*c.max_depth) : json(nullptr);
  j["features_per_split"] = c.features_per_split ? json(*c.features_per_split) : json(nullptr);
  j["bootstrap"] = c.bootstrap;
  j["seed"] = c.seed;
  return j;
}

inline json to_json(const MlpConfig& c) {
  json j;
  j["hidden_units"] = c.hidden_units ? json(*c.hidden_units) : json(nullptr);
  j["learning_rate"] = c.learning_rate;
  j["iterations"] = c.iterations;
  j["seed"] = c.seed;
  j["init_scale"] = c.init_scale;
  return j;
}

inline json to_json(const ForestModel& m) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["kind"] = "forest";
  j["feature_names"] = m.feature_names();
  j["config"] = to_json(m.config());
  j["target_min"] = m.target_min();
  j["target_max"] = m.target_max();
  json trees = json::array();
  for (const auto& t : m.trees()) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         value = json::array(), decrease = json::array(), count = json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
      decrease.push_back(n.impurity_decrease);
      count.push_back(n.n_samples);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value},
                     {"impurity_decrease", decrease},
                     {"n_samples", count}});
  }
  j["trees"] = std::move(trees);
  return j;
}

inline json to_json(const MlpModel& m) {
  const auto& p = m.parameters();
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["kind"] = "mlp";
  j["feature_names"] = m.feature_names();
  j["config"] = to_json(m.config());
  j["standardization"] = {{"mean", m.scaler().mean}, {"stddev", m.scaler().stddev}};
  j["inputs"] = p.inputs;
  j["hidden"] = p.hidden;
  j["w1"] = p.w1;
  j["b1"] = p.b1;
  j["w2"] = p.w2;
  j["b2"] = p.b2;
  j["loss_history"] = m.loss_history();
  return j;
}

inline json to_json(const Model& m) {
  return std::visit([](const auto& model) { return to_json(model); }, m);
}

namespace detail {

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline ForestModel forest_from_json(const json& j) {
  ForestConfig cfg;
  const auto& c = j.at("config");
  cfg.n_trees = c.at("n_trees").get<std::size_t>();
  cfg.max_depth = optional_field<std::size_t>(c, "max_depth");
  cfg.features_per_split = optional_field<std::size_t>(c, "features_per_split");
  cfg.bootstrap = c.at("bootstrap").get<bool>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  auto names = j.at("feature_names").get<std::vector<std::string>>();

  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) {
    auto feature = t.at("feature").get<std::vector<std::int32_t>>();
    auto threshold = t.at("threshold").get<std::vector<double>>();
    auto left = t.at("left").get<std::vector<std::uint32_t>>();
    auto right = t.at("right").get<std::vector<std::uint32_t>>();
    auto value = t.at("value").get<std::vector<double>>();
    auto decrease = t.at("impurity_decrease").get<std::vector<double>>();
    auto count = t.at("n_samples").get<std::vector<std::uint32_t>>();
    const std::size_t n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
        decrease.size() != n || count.size() != n)
      throw Error(ErrorCode::InvalidModel, "tree arrays differ in length");
    RegressionTree tree;
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& node = tree.nodes[i];
      node = {feature[i], threshold[i], left[i], right[i], value[i], decrease[i], count[i]};
      if (!node.is_leaf()) {
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= names.size() || node.left <= i ||
            node.right <= i || node.left >= n || node.right >= n)
          throw Error(ErrorCode::InvalidModel, "tree node " + std::to_string(i) + " is malformed");
      }
    }
    trees.push_back(std::move(tree));
  }
  if (trees.size() != cfg.n_trees) throw Error(ErrorCode::InvalidModel, "tree count does not match config");
  return ForestModel(cfg, std::move(names), std::move(trees), j.at("target_min").get<double>(),
                     j.at("target_max").get<double>());
}

inline MlpModel mlp_from_json(const json& j) {
  MlpConfig cfg;
  const auto& c = j.at("config");
  cfg.hidden_units = optional_field<std::size_t>(c, "hidden_units");
  cfg.learning_rate = c.at("learning_rate").get<double>();
  cfg.iterations = c.at("iterations").get<std::size_t>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  cfg.init_scale = c.at("init_scale").get<double>();

  MlpParameters p;
  p.inputs = j.at("inputs").get<std::size_t>();
  p.hidden = j.at("hidden").get<std::size_t>();
  p.w1 = j.at("w1").get<std::vector<double>>();
  p.b1 = j.at("b1").get<std::vector<double>>();
  p.w2 = j.at("w2").get<std::vector<double>>();
  p.b2 = j.at("b2").get<double>();
  Standardizer s;
  s.mean = j.at("standardization").at("mean").get<std::vector<double>>();
  s.stddev = j.at("standardization").at("stddev").get<std::vector<double>>();
  auto names = j.at("feature_names").get<std::vector<std::string>>();
  if (p.w1.size() != p.inputs * p.hidden || p.b1.size() != p.hidden || p.w2.size() != p.hidden ||
      s.mean.size() != p.inputs || s.stddev.size() != p.inputs || names.size() != p.inputs)
    throw Error(ErrorCode::InvalidModel, "MLP parameter shapes are inconsistent");
  auto history = j.value("loss_history", std::vector<double>{});
  return MlpModel(cfg, std::move(names), std::move(s), std::move(p), std::move(history));
}

}  // namespace detail

inline Model model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat)
      throw Error(ErrorCode::InvalidModel, "not an avqoe model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::InvalidModel, "unsupported model version " + j.at("version").dump());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "forest") return detail::forest_from_json(j);
    if (kind == "mlp") return detail::mlp_from_json(j);
    throw Error(ErrorCode::InvalidModel, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidModel, e.what());
  }
}

inline void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << to_json(model).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

inline Model load_model(const std::string& path) {
  auto in = csv::open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidModel, path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace avqoe
