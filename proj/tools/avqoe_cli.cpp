// avqoe: command-line front end for the audiovisual quality estimation toolkit.
//
// Exit codes: 0 success, 2 input or validation error, 3 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avqoe/avqoe.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct GlobalOptions {
  std::uint64_t seed = 7;
  std::string out_dir = ".";
  std::string format = "csv";
};

/// Writes through a sibling temp file and renames, so a failed run leaves nothing behind.
void write_file(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw avqoe::Error(avqoe::ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw avqoe::Error(avqoe::ErrorCode::Io, "write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw avqoe::Error(avqoe::ErrorCode::Io, "cannot move output into '" + path.string() + "'");
  }
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw avqoe::Error(avqoe::ErrorCode::Io, "cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

/// Deterministic run record: no timestamps, so identical runs give identical manifests.
struct Manifest {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;

  void write(const fs::path& dir) const {
    json j;
    j["command"] = command;
    j["toolkit_version"] = avqoe::kVersion;
    j["seed"] = seed;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    write_file(dir / (command + ".manifest.json"), j.dump(2) + "\n");
  }
};

std::string to_text(const std::function<void(std::ostream&)>& emit) {
  std::ostringstream os;
  emit(os);
  return os.str();
}

json profiles_json(const std::vector<avqoe::SourceProfile>& profiles) {
  json arr = json::array();
  for (const auto& p : profiles)
    arr.push_back({{"resolution", avqoe::to_string(p.resolution)},
                   {"bitrate_class", avqoe::to_string(p.bitrate_class)},
                   {"overall_bitrate_kbps", p.overall_bitrate_kbps},
                   {"video_max_bitrate_kbps", p.video_max_bitrate_kbps},
                   {"audio_bitrate_kbps", p.audio_bitrate_kbps},
                   {"frame_rate_fps", p.frame_rate_fps},
                   {"audio_sample_rate_hz", p.audio_sample_rate_hz}});
  return arr;
}

std::string profiles_csv(const std::vector<avqoe::SourceProfile>& profiles) {
  std::ostringstream os;
  os << "resolution,bitrate_class,overall_bitrate_kbps,video_max_bitrate_kbps,audio_bitrate_kbps,frame_rate_fps,"
        "audio_sample_rate_hz\n";
  for (const auto& p : profiles)
    os << avqoe::to_string(p.resolution) << ',' << avqoe::to_string(p.bitrate_class) << ',' << p.overall_bitrate_kbps
       << ',' << p.video_max_bitrate_kbps << ',' << p.audio_bitrate_kbps << ',' << p.frame_rate_fps << ','
       << p.audio_sample_rate_hz << '\n';
  return os.str();
}

json importance_json(const std::vector<avqoe::FeatureImportance>& importances) {
  json arr = json::array();
  for (const auto& fi : avqoe::ranked(importances)) arr.push_back({{"feature", fi.feature}, {"importance", fi.importance}});
  return arr;
}

struct DatasetInputs {
  std::string conditions;
  std::string metadata;
  std::string ratings;
};

avqoe::Dataset load_dataset(const DatasetInputs& in, json& digests) {
  auto conditions = avqoe::ingest_conditions(in.conditions);
  auto metadata = avqoe::ingest_metadata(in.metadata);
  auto ratings = avqoe::ingest_ratings(in.ratings);
  avqoe::check_rating_conditions(ratings, conditions);
  std::map<std::string, std::string> provenance{{in.conditions, avqoe::file_sha256(in.conditions)},
                                                {in.metadata, avqoe::file_sha256(in.metadata)},
                                                {in.ratings, avqoe::file_sha256(in.ratings)}};
  for (const auto& [path, digest] : provenance) digests[path] = digest;
  return avqoe::build_dataset(conditions, avqoe::builtin_source_profiles(), metadata, avqoe::aggregate_mos(ratings),
                              std::move(provenance));
}

// --- commands ---------------------------------------------------------------

int cmd_matrix(const GlobalOptions& g, const std::string& output) {
  const fs::path out = output.empty() ? prepare_out_dir(g.out_dir) / "conditions.csv" : fs::path(output);
  const auto matrix = avqoe::generate_condition_matrix();
  write_file(out, to_text([&](std::ostream& os) { avqoe::write_condition_csv(os, matrix); }));
  Manifest m{"matrix", {{"conditions", matrix.size()}}, json::object(), {out.string()}, g.seed};
  m.write(out.has_parent_path() ? out.parent_path() : fs::path("."));
  std::cerr << "wrote " << matrix.size() << " conditions to " << out.string() << '\n';
  return kExitOk;
}

int cmd_synth(const GlobalOptions& g, double noise, std::size_t subjects) {
  avqoe::OracleConfig cfg;
  cfg.seed = g.seed;
  cfg.rating_noise_sd = noise;
  cfg.subject_count = subjects;
  cfg.validate();
  const auto dir = prepare_out_dir(g.out_dir);
  const auto matrix = avqoe::generate_condition_matrix();
  const auto profiles = avqoe::builtin_source_profiles();
  const auto ratings = avqoe::synthesize_ratings(matrix, profiles, cfg);
  const auto metadata = avqoe::synthesize_metadata(matrix, profiles, cfg);
  write_file(dir / "ratings.csv", to_text([&](std::ostream& os) { avqoe::write_ratings_csv(os, ratings); }));
  write_file(dir / "metadata.csv", to_text([&](std::ostream& os) { avqoe::write_metadata_csv(os, metadata); }));
  Manifest m{"synth",
             {{"rating_noise_sd", cfg.rating_noise_sd},
              {"subject_count", cfg.subject_count},
              {"plr_weight", cfg.plr_weight},
              {"jitter_weight", cfg.jitter_weight},
              {"bw_weight", cfg.bw_weight},
              {"codec_weight", cfg.codec_weight}},
             json::object(),
             {(dir / "ratings.csv").string(), (dir / "metadata.csv").string()},
             g.seed};
  m.write(dir);
  std::cerr << "wrote " << ratings.size() << " ratings and " << metadata.size() << " metadata records to "
            << dir.string() << '\n';
  return kExitOk;
}

struct EvaluateOptions {
  DatasetInputs inputs;
  std::string model = "both";
  std::size_t k = 10;
  std::size_t repetitions = 10;
  bool stratify = false;
  std::size_t trees = 100;
  std::size_t threads = 1;
  double learning_rate = 0.02;
  std::size_t iterations = 100;
  std::size_t hidden = 0;
};

int cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o) {
  json digests = json::object();
  const auto dataset = load_dataset(o.inputs, digests);

  avqoe::ForestConfig forest;
  forest.n_trees = o.trees;
  forest.seed = g.seed;
  forest.threads = o.threads;
  avqoe::MlpConfig mlp;
  mlp.learning_rate = o.learning_rate;
  mlp.iterations = o.iterations;
  mlp.seed = g.seed;
  if (o.hidden > 0) mlp.hidden_units = o.hidden;

  std::vector<avqoe::ModelSpec> specs;
  if (o.model == "forest" || o.model == "both") specs.push_back({"forest", forest});
  if (o.model == "mlp" || o.model == "both") specs.push_back({"mlp", mlp});

  avqoe::CvConfig cv{o.k, o.repetitions, g.seed, o.stratify};
  const auto table = avqoe::compare_models(dataset, specs, cv);
  const json report = avqoe::to_json(table);

  const auto dir = prepare_out_dir(g.out_dir);
  std::vector<std::string> outputs;
  write_file(dir / "report.json", report.dump(2) + "\n");
  outputs.push_back((dir / "report.json").string());
  for (const auto& r : table.reports) {
    const auto path = dir / ("scatter_" + r.model + ".csv");
    write_file(path, to_text([&](std::ostream& os) { avqoe::write_scatter_csv(os, r); }));
    outputs.push_back(path.string());
    if (!r.importances.empty()) {
      write_file(dir / "importance.csv", to_text([&](std::ostream& os) { avqoe::write_importance_csv(os, r.importances); }));
      outputs.push_back((dir / "importance.csv").string());
    }
  }

  json config{{"model", o.model}, {"cv", avqoe::to_json(cv)}};
  for (const auto& s : specs)
    config[s.name] = std::visit([](const auto& c) { return avqoe::to_json(c); }, s.config);
  Manifest{"evaluate", config, digests, outputs, g.seed}.write(dir);

  // Printed numbers are the report's own JSON values.
  if (g.format == "json") {
    json summary = json::object();
    for (const auto& r : table.reports) {
      const auto& entry = report.at(r.model);
      summary[r.model] = {{"rmse", entry.at("rmse")},
                          {"pearson_r", entry.at("pearson_r")},
                          {"abs_err_p95", entry.at("abs_err_p95")},
                          {"outlier_ratio", entry.at("outlier_ratio")}};
    }
    std::cout << summary.dump(2) << '\n';
  } else {
    std::cout << "model,rmse,pearson_r,abs_err_p95,outlier_ratio\n";
    for (const auto& name : report.at("ranking")) {
      const auto& entry = report.at(name.get<std::string>());
      std::cout << name.get<std::string>() << ',' << entry.at("rmse").dump() << ',' << entry.at("pearson_r").dump() << ','
                << entry.at("abs_err_p95").dump() << ',' << entry.at("outlier_ratio").dump() << '\n';
    }
  }
  return kExitOk;
}

int cmd_importance(const GlobalOptions& g, const DatasetInputs& inputs, std::size_t trees, std::size_t threads,
                   const std::string& save_model) {
  json digests = json::object();
  const auto dataset = load_dataset(inputs, digests);
  avqoe::ForestConfig cfg;
  cfg.n_trees = trees;
  cfg.seed = g.seed;
  cfg.threads = threads;
  const auto model = avqoe::train_forest(dataset, cfg);
  const auto importances = model.feature_importance();

  const auto dir = prepare_out_dir(g.out_dir);
  std::vector<std::string> outputs;
  std::string text;
  fs::path path;
  if (g.format == "json") {
    text = importance_json(importances).dump(2) + "\n";
    path = dir / "importance.json";
  } else {
    text = to_text([&](std::ostream& os) { avqoe::write_importance_csv(os, importances); });
    path = dir / "importance.csv";
  }
  write_file(path, text);
  outputs.push_back(path.string());
  if (!save_model.empty()) {
    write_file(save_model, avqoe::to_json(model).dump(1) + "\n");
    outputs.push_back(save_model);
  }
  Manifest{"importance", {{"forest", avqoe::to_json(cfg)}}, digests, outputs, g.seed}.write(dir);
  std::cout << text;
  return kExitOk;
}

int cmd_profiles(const GlobalOptions& g, const std::string& output) {
  const auto profiles = avqoe::builtin_source_profiles();
  const std::string text = g.format == "json" ? profiles_json(profiles).dump(2) + "\n" : profiles_csv(profiles);
  if (output.empty()) {
    std::cout << text;
    return kExitOk;
  }
  const fs::path out(output);
  write_file(out, text);
  Manifest{"profiles", {{"format", g.format}}, json::object(), {out.string()}, g.seed}.write(
      out.has_parent_path() ? out.parent_path() : fs::path("."));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-reference parametric audiovisual quality estimation toolkit"};
  app.set_version_flag("--version", std::string(avqoe::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for outputs and the run manifest")->capture_default_str();
  app.add_option("--format", g.format, "Tabular output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  std::string matrix_out;
  auto* matrix = app.add_subcommand("matrix", "Write the 144-condition influence-factor matrix");
  matrix->add_option("-o,--output", matrix_out, "Output CSV (default <out-dir>/conditions.csv)");

  double noise = 0.35;
  std::size_t subjects = 24;
  auto* synth = app.add_subcommand("synth", "Write synthetic ratings.csv and metadata.csv");
  synth->add_option("--noise", noise, "Rating noise standard deviation (MOS units)")->capture_default_str();
  synth->add_option("--subjects", subjects, "Subjects per condition")->capture_default_str();

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Repeated k-fold comparison of forest and MLP models");
  evaluate->add_option("--conditions", eval.inputs.conditions, "Condition matrix CSV")->required();
  evaluate->add_option("--metadata", eval.inputs.metadata, "Metadata CSV")->required();
  evaluate->add_option("--ratings", eval.inputs.ratings, "Ratings CSV")->required();
  evaluate->add_option("--model", eval.model, "Models to evaluate")
      ->check(CLI::IsMember({"forest", "mlp", "both"}))
      ->capture_default_str();
  evaluate->add_option("--k", eval.k, "Folds")->capture_default_str();
  evaluate->add_option("--repetitions", eval.repetitions, "Shuffled repetitions")->capture_default_str();
  evaluate->add_flag("--stratify", eval.stratify, "Stratify folds by target MOS quintile");
  evaluate->add_option("--trees", eval.trees, "Trees per forest")->capture_default_str();
  evaluate->add_option("--threads", eval.threads, "Tree-building threads")->capture_default_str();
  evaluate->add_option("--learning-rate", eval.learning_rate, "MLP learning rate")->capture_default_str();
  evaluate->add_option("--iterations", eval.iterations, "MLP gradient steps")->capture_default_str();
  evaluate->add_option("--hidden", eval.hidden, "MLP hidden units (0 = input dimension)")->capture_default_str();

  DatasetInputs imp_inputs;
  std::size_t imp_trees = 100;
  std::size_t imp_threads = 1;
  std::string save_model;
  auto* importance = app.add_subcommand("importance", "Train a forest on all rows and report feature importance");
  importance->add_option("--conditions", imp_inputs.conditions, "Condition matrix CSV")->required();
  importance->add_option("--metadata", imp_inputs.metadata, "Metadata CSV")->required();
  importance->add_option("--ratings", imp_inputs.ratings, "Ratings CSV")->required();
  importance->add_option("--trees", imp_trees, "Trees")->capture_default_str();
  importance->add_option("--threads", imp_threads, "Tree-building threads")->capture_default_str();
  importance->add_option("--save-model", save_model, "Also write the trained forest as JSON");

  std::string profiles_out;
  auto* profiles = app.add_subcommand("profiles", "Print the built-in source profiles");
  profiles->add_option("-o,--output", profiles_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*matrix) return cmd_matrix(g, matrix_out);
    if (*synth) return cmd_synth(g, noise, subjects);
    if (*evaluate) return cmd_evaluate(g, eval);
    if (*importance) return cmd_importance(g, imp_inputs, imp_trees, imp_threads, save_model);
    if (*profiles) return cmd_profiles(g, profiles_out);
  } catch (const avqoe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool internal = e.code() == avqoe::ErrorCode::NonFiniteLoss || e.code() == avqoe::ErrorCode::InvalidModel;
    return internal ? kExitInternal : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
