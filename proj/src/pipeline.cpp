#include "cyclecast/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "cyclecast/error.hpp"

namespace cyclecast {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  if (!obj.is_object()) throw Error(Errc::ConfigError, std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(Errc::ConfigError, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

template <typename T>
void read_opt(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
  } else {
    out = obj.at(key).get<T>();
  }
}

template <typename T>
ordered_json opt_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------

DataManifest DataManifest::from_json(const json& doc) {
  try {
    reject_unknown_keys(doc, {"region", "labels", "series", "note"}, "manifest");
    DataManifest m;
    m.region = parse_region(doc.at("region").get<std::string>());
    if (doc.contains("labels")) m.labels = doc.at("labels").get<std::string>();
    for (const auto& s : doc.at("series")) {
      reject_unknown_keys(s, {"id", "file", "category", "transform", "provider", "provider_series"},
                          "manifest series");
      SeriesSpec spec;
      spec.id = s.at("id").get<std::string>();
      spec.file = s.value("file", "series/" + spec.id + ".csv");
      spec.category = parse_category(s.at("category").get<std::string>());
      const std::string t = s.value("transform", "auto");
      if (t != "auto") spec.transform = parse_transform(t);
      spec.provider = s.value("provider", "");
      spec.provider_series = s.value("provider_series", spec.id);
      m.series.push_back(std::move(spec));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("manifest: ") + e.what());
  }
}

ordered_json DataManifest::to_json() const {
  ordered_json doc;
  doc["region"] = std::string(cyclecast::to_string(region));
  doc["labels"] = labels.generic_string();
  ordered_json arr = ordered_json::array();
  for (const auto& s : series) {
    ordered_json e;
    e["id"] = s.id;
    e["file"] = s.file.generic_string();
    e["category"] = std::string(cyclecast::to_string(s.category));
    e["transform"] = s.transform ? std::string(cyclecast::to_string(*s.transform)) : "auto";
    if (!s.provider.empty()) {
      e["provider"] = s.provider;
      e["provider_series"] = s.provider_series;
    }
    arr.push_back(std::move(e));
  }
  doc["series"] = std::move(arr);
  return doc;
}

DataManifest DataManifest::load(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void DataManifest::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------

std::size_t RunConfig::effective_window() const {
  return window.value_or(region == Region::EZ ? 12 : 9);
}

SplitSpec RunConfig::effective_split() const { return split.value_or(SplitSpec::standard(region)); }

RbbcpConfig RunConfig::rbbcp() const { return {rbbcp_window.value_or(effective_window()), zero_slope}; }

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig c;
  try {
    reject_unknown_keys(doc, {"region", "window", "split", "model", "preprocess", "index", "features",
                              "train", "rbbcp", "paths", "seed"},
                        "config");
    if (doc.contains("region")) c.region = parse_region(doc.at("region").get<std::string>());
    read_opt(doc, "window", c.window);
    if (c.window && *c.window < 2) throw Error(Errc::ConfigError, "window must be at least 2");
    if (doc.contains("split") && !doc.at("split").is_null()) {
      const auto& s = doc.at("split");
      reject_unknown_keys(s, {"train_end", "validation_end", "test_end"}, "split");
      try {
        c.split = SplitSpec(MonthStamp::parse(s.at("train_end").get<std::string>()),
                            MonthStamp::parse(s.at("validation_end").get<std::string>()),
                            MonthStamp::parse(s.at("test_end").get<std::string>()));
      } catch (const Error& e) {
        throw Error(Errc::ConfigError, std::string("split: ") + e.what());
      }
    }
    if (doc.contains("model")) c.model = parse_model_kind(doc.at("model").get<std::string>());
    if (doc.contains("preprocess")) {
      const auto& p = doc.at("preprocess");
      reject_unknown_keys(p, {"zscore_mode", "zscore_min_window", "nw_lag", "subsample_stride", "adf_alpha",
                              "long_run_weighting"},
                          "preprocess");
      std::string mode = p.value("zscore_mode", "expanding");
      if (mode == "full") {
        c.preprocess.zscore = ZScoreMode::full();
      } else if (mode == "expanding") {
        c.preprocess.zscore = ZScoreMode::expanding(p.value("zscore_min_window", std::size_t{24}));
      } else {
        throw Error(Errc::ConfigError, "zscore_mode must be 'full' or 'expanding'");
      }
      read_opt(p, "nw_lag", c.preprocess.nw_lag);
      read_opt(p, "subsample_stride", c.preprocess.subsample_stride);
      read_opt(p, "adf_alpha", c.preprocess.adf_alpha);
      read_opt(p, "long_run_weighting", c.preprocess.long_run_weighting);
      if (c.preprocess.subsample_stride < 1) throw Error(Errc::ConfigError, "subsample_stride must be >= 1");
    }
    if (doc.contains("index")) {
      const auto& i = doc.at("index");
      reject_unknown_keys(i, {"min_window_months", "growth_reference_series", "inflation_reference_series"},
                          "index");
      read_opt(i, "min_window_months", c.index.min_window_months);
      read_opt(i, "growth_reference_series", c.index.growth_reference_series);
      read_opt(i, "inflation_reference_series", c.index.inflation_reference_series);
    }
    if (doc.contains("features")) {
      const auto& f = doc.at("features");
      reject_unknown_keys(f, {"trend_sign_only", "exclude_categories"}, "features");
      read_opt(f, "trend_sign_only", c.features.trend_sign_only);
      if (f.contains("exclude_categories")) {
        c.features.exclude.clear();
        for (const auto& cat : f.at("exclude_categories")) {
          c.features.exclude.push_back(parse_category(cat.get<std::string>()));
        }
      }
    }
    if (doc.contains("train")) {
      const auto& t = doc.at("train");
      reject_unknown_keys(t, {"learning_rate", "epochs", "batch_size", "l2", "l2_grid", "early_stopping_patience",
                              "max_iterations", "tolerance", "hidden_layers", "hidden_units", "dropout",
                              "svm_step", "svm_epochs", "calibration_fraction", "class_weights"},
                          "train");
      auto& tc = c.train;
      read_opt(t, "learning_rate", tc.learning_rate);
      read_opt(t, "epochs", tc.epochs);
      read_opt(t, "batch_size", tc.batch_size);
      read_opt(t, "l2", tc.l2);
      read_opt(t, "l2_grid", c.l2_grid);
      read_opt(t, "early_stopping_patience", tc.early_stopping_patience);
      read_opt(t, "max_iterations", tc.max_iterations);
      read_opt(t, "tolerance", tc.tolerance);
      read_opt(t, "hidden_layers", tc.hidden_layers);
      read_opt(t, "hidden_units", tc.hidden_units);
      read_opt(t, "dropout", tc.dropout);
      read_opt(t, "svm_step", tc.svm_step);
      read_opt(t, "svm_epochs", tc.svm_epochs);
      read_opt(t, "calibration_fraction", tc.calibration_fraction);
      if (t.contains("class_weights") && !t.at("class_weights").is_null()) {
        auto w = t.at("class_weights").get<std::vector<double>>();
        if (w.size() != kNumPhases) throw Error(Errc::ConfigError, "class_weights needs 4 entries");
        tc.class_weights = std::array<double, kNumPhases>{w[0], w[1], w[2], w[3]};
      }
    }
    if (doc.contains("rbbcp")) {
      const auto& r = doc.at("rbbcp");
      reject_unknown_keys(r, {"window", "zero_slope"}, "rbbcp");
      read_opt(r, "window", c.rbbcp_window);
      std::string z = r.value("zero_slope", "down");
      if (z != "down" && z != "up") throw Error(Errc::ConfigError, "zero_slope must be 'down' or 'up'");
      c.zero_slope = z == "up" ? ZeroSlopeRule::Up : ZeroSlopeRule::Down;
    }
    if (doc.contains("paths")) {
      const auto& p = doc.at("paths");
      reject_unknown_keys(p, {"data_dir", "out_dir", "cache_dir"}, "paths");
      if (p.contains("data_dir")) c.data_dir = p.at("data_dir").get<std::string>();
      if (p.contains("out_dir")) c.out_dir = p.at("out_dir").get<std::string>();
      if (p.contains("cache_dir")) c.cache_dir = p.at("cache_dir").get<std::string>();
    }
    read_opt(doc, "seed", c.seed);
    c.train.validate();
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  c.train.seed = c.seed;
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return from_json(doc);
}

ordered_json RunConfig::to_json() const {
  ordered_json d;
  d["region"] = std::string(cyclecast::to_string(region));
  d["window"] = effective_window();
  auto s = effective_split();
  d["split"] = {{"train_end", s.train_end().to_string()},
                {"validation_end", s.validation_end().to_string()},
                {"test_end", s.test_end().to_string()}};
  d["model"] = std::string(cyclecast::to_string(model));
  d["preprocess"] = {
      {"zscore_mode", preprocess.zscore.kind == ZScoreKind::Full ? "full" : "expanding"},
      {"zscore_min_window", preprocess.zscore.min_window},
      {"nw_lag", opt_json(preprocess.nw_lag)},
      {"subsample_stride", preprocess.subsample_stride},
      {"adf_alpha", preprocess.adf_alpha},
      {"long_run_weighting", preprocess.long_run_weighting}};
  d["index"] = {{"min_window_months", index.min_window_months},
                {"growth_reference_series", opt_json(index.growth_reference_series)},
                {"inflation_reference_series", opt_json(index.inflation_reference_series)}};
  ordered_json excl = ordered_json::array();
  for (auto c : features.exclude) excl.push_back(std::string(cyclecast::to_string(c)));
  d["features"] = {{"trend_sign_only", features.trend_sign_only}, {"exclude_categories", excl}};
  d["train"] = {{"learning_rate", train.learning_rate},
                {"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"l2", train.l2},
                {"l2_grid", l2_grid},
                {"early_stopping_patience", train.early_stopping_patience},
                {"max_iterations", train.max_iterations},
                {"tolerance", train.tolerance},
                {"hidden_layers", train.hidden_layers},
                {"hidden_units", train.hidden_units},
                {"dropout", train.dropout},
                {"svm_step", train.svm_step},
                {"svm_epochs", train.svm_epochs},
                {"calibration_fraction", train.calibration_fraction},
                {"class_weights", train.class_weights ? ordered_json(*train.class_weights)
                                                      : ordered_json(nullptr)}};
  d["rbbcp"] = {{"window", rbbcp().window}, {"zero_slope", zero_slope == ZeroSlopeRule::Up ? "up" : "down"}};
  d["paths"] = {{"data_dir", data_dir.generic_string()},
                {"out_dir", out_dir.generic_string()},
                {"cache_dir", cache_dir.generic_string()}};
  d["seed"] = seed;
  return d;
}

// ---------------------------------------------------------------------------

LoadedData load_data(const std::filesystem::path& data_dir) {
  if (!std::filesystem::is_directory(data_dir)) {
    throw Error(Errc::MissingFile, "data directory " + data_dir.string() + " does not exist");
  }
  LoadedData d;
  d.manifest = DataManifest::load(data_dir / "manifest.json");
  d.labels = load_labels(data_dir / d.manifest.labels, d.manifest.region);
  for (const auto& s : d.manifest.series) {
    auto raw = load_series_csv(data_dir / s.file, s.id, d.manifest.region, s.category);
    if (raw.observations.size() < 2) throw Error(Errc::TooShort, s.id + " has fewer than 2 observations");
    d.raw.push_back(std::move(raw));
  }
  if (d.raw.empty()) throw Error(Errc::Empty, "manifest lists no series");
  return d;
}

StandardizedSeries preprocess_series(const RawSeries& raw, std::optional<Transform> transform,
                                     const PreprocessConfig& cfg) {
  Transform t = Transform::None;
  if (transform) {
    t = *transform;
  } else {
    const auto n = raw.observations.size();
    const auto lag = schwert_lag(n);
    if (n >= lag + 10) {
      auto adf = adf_statistic(raw, lag, cfg.adf_alpha);
      if (!adf.is_stationary) t = Transform::Diff;
    }
  }
  RawSeries stationary = t == Transform::None ? raw : difference_transform(raw, t);
  auto z = zscore(stationary, cfg.zscore);
  z.provenance.transform = t;
  z.provenance.nw_lag = cfg.nw_lag;
  z.provenance.subsample_stride = cfg.subsample_stride;
  return z;
}

std::vector<StandardizedSeries> preprocess_all(const LoadedData& data, const PreprocessConfig& cfg) {
  std::vector<StandardizedSeries> out;
  for (std::size_t i = 0; i < data.raw.size(); ++i) {
    out.push_back(preprocess_series(data.raw[i], data.manifest.series[i].transform, cfg));
  }
  return out;
}

Panel build_panel(const std::vector<StandardizedSeries>& series) {
  if (series.empty()) throw Error(Errc::Empty, "no series");
  std::optional<MonthRange> range;
  for (const auto& s : series) {
    if (s.values.empty()) throw Error(Errc::EmptyOverlap, s.id + " has no standardized values");
    MonthRange r{s.values.begin()->first, s.values.rbegin()->first};
    if (!range) {
      range = r;
    } else {
      range->first = std::min(range->first, r.first);
      range->last = std::max(range->last, r.last);
    }
  }
  return align_panel(series, *range);
}

namespace {

CompositeIndex one_index(const Panel& panel, Category category, IndexKind kind, Region region,
                         const std::optional<std::string>& reference, const RunConfig& cfg) {
  const Category keep[] = {category};
  Panel sub = panel.select(keep);
  if (sub.cols() == 0) {
    throw Error(Errc::EmptyAfterFilter, std::string("no ") + std::string(to_string(category)) + " series");
  }
  sub = sub.trim_to_common_start();
  ExpandingPcaOptions opts;
  opts.min_window_months = cfg.index.min_window_months;
  opts.long_run_weighting = cfg.preprocess.long_run_weighting;
  opts.nw_lag = cfg.preprocess.nw_lag;
  opts.subsample_stride = cfg.preprocess.subsample_stride;
  if (reference) {
    auto col = sub.column_of(*reference);
    if (!col) throw Error(Errc::ConfigError, "reference series '" + *reference + "' is not in the " +
                                                 std::string(to_string(kind)) + " group");
    opts.reference_column = *col;
  }
  return expanding_pca_index(sub, kind, region, opts);
}

}  // namespace

IndexPair build_indices(const Panel& panel, Region region, const RunConfig& cfg) {
  return {one_index(panel, Category::Growth, IndexKind::Growth, region, cfg.index.growth_reference_series, cfg),
          one_index(panel, Category::Inflation, IndexKind::Inflation, region,
                    cfg.index.inflation_reference_series, cfg)};
}

FeatureMatrix build_features(const Panel& panel, const RunConfig& cfg) {
  FeatureOptions opts = cfg.features;
  opts.window = cfg.effective_window();
  return build_feature_matrix(panel, opts);
}

SplitPairs split_pairs(const ForecastPairs& pairs, const SplitSpec& spec) {
  std::vector<std::size_t> train, validation, test;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    switch (split_part(spec, pairs.target_months[i])) {
      case SplitPart::Train: train.push_back(i); break;
      case SplitPart::Validation: validation.push_back(i); break;
      case SplitPart::Test: test.push_back(i); break;
      case SplitPart::Outside: break;
    }
  }
  return {pairs.subset(train), pairs.subset(validation), pairs.subset(test)};
}

namespace {

ForecastPairs concat(const ForecastPairs& a, const ForecastPairs& b) {
  ForecastPairs out = a;
  out.feature_months.insert(out.feature_months.end(), b.feature_months.begin(), b.feature_months.end());
  out.target_months.insert(out.target_months.end(), b.target_months.begin(), b.target_months.end());
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  out.x.resize(a.x.rows() + b.x.rows(), std::max(a.x.cols(), b.x.cols()));
  if (a.x.rows()) out.x.topRows(a.x.rows()) = a.x;
  if (b.x.rows()) out.x.bottomRows(b.x.rows()) = b.x;
  return out;
}

Classifier fit(ModelKind kind, const Eigen::MatrixXd& x, std::span<const PhaseLabel> y, const TrainConfig& tc,
               std::vector<std::string>& log) {
  char line[200];
  switch (kind) {
    case ModelKind::Mlr: {
      MlrTrainLog l;
      auto m = train_mlr(x, y, tc, &l);
      std::snprintf(line, sizeof line, "mlr l2=%g iterations=%d converged=%s final_loss=%.10g", tc.l2,
                    l.iterations, l.converged ? "yes" : "no", l.final_loss);
      log.emplace_back(line);
      return m;
    }
    case ModelKind::Svm: {
      auto m = train_svm(x, y, tc);
      std::snprintf(line, sizeof line, "svm l2=%g temperature=%.10g training_log_loss=%.10g", tc.l2,
                    m.temperature, log_loss(Classifier(m), x, y));
      log.emplace_back(line);
      return m;
    }
    case ModelKind::Mlp: {
      MlpTrainLog l;
      auto m = train_mlp(x, y, tc, nullptr, &l);
      std::snprintf(line, sizeof line, "mlp epochs=%d final_loss=%.10g", l.epochs_run, l.final_train_loss);
      log.emplace_back(line);
      return m;
    }
    case ModelKind::Rbbcp: break;
  }
  throw Error(Errc::ConfigError, "rbbcp is not trainable");
}

}  // namespace

TrainOutcome train_model(const SplitPairs& pairs, const std::vector<std::string>& feature_names,
                         const RunConfig& cfg) {
  TrainOutcome out;
  auto& m = out.model;
  m.kind = cfg.model;
  m.region = cfg.region;
  m.window = cfg.effective_window();
  m.feature_names = feature_names;
  m.rbbcp = cfg.rbbcp();
  if (cfg.model == ModelKind::Rbbcp) {
    out.log.push_back("rbbcp: rule-based, nothing to train");
    m.training["trained"] = false;
    return out;
  }
  if (pairs.train.size() == 0) throw Error(Errc::Empty, "training split is empty");

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  char line[200];
  if (pairs.validation.size() > 0) {
    FeatureScaler scaler = FeatureScaler::fit(pairs.train.x);
    Eigen::MatrixXd xt = scaler.transform(pairs.train.x);
    Eigen::MatrixXd xv = scaler.transform(pairs.validation.x);
    if (cfg.model == ModelKind::Mlp) {
      TrainConfig probe = tc;
      probe.l2 = 0.0;
      MlpTrainLog l;
      Validation val{xv, pairs.validation.y};
      train_mlp(xt, pairs.train.y, probe, &val, &l);
      tc.epochs = std::max(l.best_epoch, 1);
      std::snprintf(line, sizeof line, "select: mlp early stopping best_epoch=%d validation_loss=%.10g",
                    l.best_epoch, l.best_validation_loss.value_or(0.0));
      out.log.emplace_back(line);
      m.training["selected_epochs"] = tc.epochs;
    } else if (!cfg.l2_grid.empty()) {
      double best_loss = std::numeric_limits<double>::infinity();
      double best_l2 = tc.l2;
      for (double l2 : cfg.l2_grid) {
        TrainConfig probe = tc;
        probe.l2 = l2;
        std::vector<std::string> ignored;
        auto model = fit(cfg.model, xt, pairs.train.y, probe, ignored);
        double vl = log_loss(model, xv, pairs.validation.y);
        auto dists = predict_proba(model, xv);
        double acc = topk_accuracy(dists, pairs.validation.y, 1);
        std::snprintf(line, sizeof line, "select: l2=%g validation_log_loss=%.10g validation_top1=%.4f", l2, vl,
                      acc);
        out.log.emplace_back(line);
        if (vl < best_loss) {
          best_loss = vl;
          best_l2 = l2;
        }
      }
      tc.l2 = best_l2;
      m.training["selected_l2"] = best_l2;
    }
  }
  if (cfg.model == ModelKind::Mlp) tc.l2 = 0.0;

  ForecastPairs full = concat(pairs.train, pairs.validation);
  FeatureScaler scaler = FeatureScaler::fit(full.x);
  Eigen::MatrixXd xs = scaler.transform(full.x);
  m.classifier = fit(cfg.model, xs, full.y, tc, out.log);
  m.scaler = scaler;
  const double final_loss = log_loss(*m.classifier, xs, full.y);
  std::snprintf(line, sizeof line, "final fit on train+validation: samples=%zu training_log_loss=%.10g",
                full.size(), final_loss);
  out.log.emplace_back(line);
  m.training["trained"] = true;
  m.training["samples"] = full.size();
  m.training["final_training_log_loss"] = final_loss;
  m.training["seed"] = cfg.seed;
  return out;
}

Evaluation evaluate_model(const ModelFile& model, const ForecastPairs& test, const IndexPair* indices) {
  Evaluation ev;
  if (model.kind == ModelKind::Rbbcp) {
    if (!indices) throw Error(Errc::ConfigError, "rbbcp evaluation needs the composite indices");
    for (std::size_t i = 0; i < test.size(); ++i) {
      try {
        ev.distributions.push_back(
            rbbcp_forecast(indices->inflation, indices->growth, test.feature_months[i], model.rbbcp));
      } catch (const Error& e) {
        if (e.code() != Errc::InsufficientHistory) throw;
        continue;
      }
      ev.months.push_back(test.target_months[i]);
      ev.truth.push_back(test.y[i]);
    }
  } else {
    if (!model.classifier || !model.scaler) throw Error(Errc::CorruptFile, "model has no classifier");
    if (test.size() > 0) ev.distributions = predict_proba(*model.classifier, model.scaler->transform(test.x));
    ev.months = test.target_months;
    ev.truth = test.y;
  }
  if (ev.truth.empty()) throw Error(Errc::Empty, "no test samples to evaluate");
  ev.report = evaluate(ev.distributions, ev.truth, model.kind != ModelKind::Rbbcp);
  ev.report.model = std::string(to_string(model.kind));
  ev.report.region = std::string(to_string(model.region));
  return ev;
}

PipelineResult run_pipeline(const LoadedData& data, const RunConfig& cfg) {
  PipelineResult r;
  r.panel = build_panel(preprocess_all(data, cfg.preprocess));
  r.indices = build_indices(r.panel, data.manifest.region, cfg);
  r.features = build_features(r.panel, cfg);
  r.pairs = split_pairs(forecast_alignment(r.features, data.labels), cfg.effective_split());
  r.trained = train_model(r.pairs, r.features.feature_names, cfg);
  r.evaluation = evaluate_model(r.trained.model, r.pairs.test, &r.indices);
  return r;
}

std::string render_phase_svg(const Evaluation& ev, const std::string& title) {
  constexpr double kWidth = 900.0, kHeight = 320.0, kLeft = 90.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::size_t n = ev.truth.size();
  auto x_at = [&](std::size_t i) { return kLeft + plot_w * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1)); };
  auto y_at = [&](PhaseLabel p) { return kTop + plot_h * (4.0 - static_cast<double>(p)) / 3.0; };
  auto step_path = [&](auto&& label_of) {
    std::ostringstream os;
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
      double y = y_at(label_of(i));
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f L%.2f,%.2f ", i == 0 ? "M" : "L", x_at(i), y, x_at(i + 1), y);
      os << buf;
    }
    return os.str();
  };
  std::ostringstream svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kWidth, kHeight, kWidth, kHeight);
  svg << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (auto p : kAllPhases) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">%d %s</text>\n",
                  kLeft, y_at(p), kLeft + plot_w, y_at(p), kLeft - 6, y_at(p) + 4, static_cast<int>(p),
                  std::string(phase_name(p)).c_str());
    svg << buf;
  }
  if (n > 0) {
    std::vector<PhaseLabel> pred;
    for (const auto& d : ev.distributions) pred.push_back(d.argmax());
    svg << "<path d=\"" << step_path([&](std::size_t i) { return ev.truth[i]; })
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    svg << "<path d=\"" << step_path([&](std::size_t i) { return pred[i]; })
        << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">%s</text>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                  kLeft, kHeight - 20, ev.months.front().to_string().c_str(), kLeft + plot_w, kHeight - 20,
                  ev.months.back().to_string().c_str());
    svg << buf;
  }
  svg << "<text x=\"" << kLeft + plot_w - 200 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"11\">"
      << "black: true phase, red dashed: predicted</text>\n</svg>\n";
  return svg.str();
}

}  // namespace cyclecast
