#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclecast/dataset.hpp"
#include "cyclecast/eval.hpp"
#include "cyclecast/features.hpp"
#include "cyclecast/indices.hpp"
#include "cyclecast/model_io.hpp"
#include "cyclecast/models.hpp"
#include "cyclecast/preprocess.hpp"
#include "cyclecast/rbbcp.hpp"

namespace cyclecast {

// One entry of a data directory's manifest.json.
struct SeriesSpec {
  std::string id;
  std::filesystem::path file;  // relative to the data directory
  Category category = Category::Other;
  // Unset means "auto": difference when the ADF test does not reject a unit root.
  std::optional<Transform> transform;
  // Where `fetch` gets it from; empty for local-only series.
  std::string provider;
  std::string provider_series;
};

struct DataManifest {
  Region region = Region::US;
  std::filesystem::path labels = "labels.csv";
  std::vector<SeriesSpec> series;

  static DataManifest from_json(const nlohmann::json& doc);
  nlohmann::ordered_json to_json() const;
  static DataManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct PreprocessConfig {
  ZScoreMode zscore = ZScoreMode::expanding(24);
  std::optional<std::size_t> nw_lag;
  std::size_t subsample_stride = 3;
  double adf_alpha = 0.05;
  bool long_run_weighting = true;
};

struct IndexConfig {
  std::size_t min_window_months = 60;
  std::optional<std::string> growth_reference_series;
  std::optional<std::string> inflation_reference_series;
};

struct RunConfig {
  Region region = Region::US;
  std::optional<std::size_t> window;  // 12 for EZ, 9 for US when unset
  std::optional<SplitSpec> split;     // standard boundaries when unset
  ModelKind model = ModelKind::Mlr;
  PreprocessConfig preprocess;
  IndexConfig index;
  FeatureOptions features;
  TrainConfig train;
  std::optional<std::size_t> rbbcp_window;  // defaults to `window`
  ZeroSlopeRule zero_slope = ZeroSlopeRule::Down;
  std::vector<double> l2_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  std::filesystem::path cache_dir = ".cyclecast-cache";
  std::uint64_t seed = 42;

  std::size_t effective_window() const;
  SplitSpec effective_split() const;
  RbbcpConfig rbbcp() const;

  // Unknown keys are rejected; missing keys keep their defaults. Throws ConfigError.
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
};

struct LoadedData {
  DataManifest manifest;
  LabeledDataset labels;
  std::vector<RawSeries> raw;
};

LoadedData load_data(const std::filesystem::path& data_dir);

// Stationarity transform, then z-score.
StandardizedSeries preprocess_series(const RawSeries& raw, std::optional<Transform> transform,
                                     const PreprocessConfig& cfg);
std::vector<StandardizedSeries> preprocess_all(const LoadedData& data, const PreprocessConfig& cfg);

// Panel over the union of all series' months.
Panel build_panel(const std::vector<StandardizedSeries>& series);

struct IndexPair {
  CompositeIndex growth;
  CompositeIndex inflation;
};

IndexPair build_indices(const Panel& panel, Region region, const RunConfig& cfg);

FeatureMatrix build_features(const Panel& panel, const RunConfig& cfg);

struct SplitPairs {
  ForecastPairs train;
  ForecastPairs validation;
  ForecastPairs test;
};

// Pairs go to the split of their target (labelled) month.
SplitPairs split_pairs(const ForecastPairs& pairs, const SplitSpec& spec);

struct TrainOutcome {
  ModelFile model;
  std::vector<std::string> log;
};

// Meta-parameters are chosen on validation, then the final model is fitted on
// train + validation.
TrainOutcome train_model(const SplitPairs& pairs, const std::vector<std::string>& feature_names,
                         const RunConfig& cfg);

struct Evaluation {
  EvaluationReport report;
  std::vector<MonthStamp> months;  // target months
  std::vector<PhaseLabel> truth;
  std::vector<PhaseDistribution> distributions;
};

// RBBCP models need `indices`; months without enough index history are skipped.
Evaluation evaluate_model(const ModelFile& model, const ForecastPairs& test, const IndexPair* indices);

// Everything from raw data to an evaluated model, in memory.
struct PipelineResult {
  Panel panel;
  IndexPair indices;
  FeatureMatrix features;
  SplitPairs pairs;
  TrainOutcome trained;
  Evaluation evaluation;
};

PipelineResult run_pipeline(const LoadedData& data, const RunConfig& cfg);

// Step chart of true vs predicted phases on a 1..4 axis.
std::string render_phase_svg(const Evaluation& eval, const std::string& title);

}  // namespace cyclecast
