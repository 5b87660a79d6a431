// cyclecast command-line interface.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 usage error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cyclecast/error.hpp"
#include "cyclecast/fetch.hpp"
#include "cyclecast/pipeline.hpp"
#include "cyclecast/synthgen.hpp"

namespace fs = std::filesystem;
using namespace cyclecast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitUsage = 4;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> region;
  bool offline = false;
  std::string format = "text";
  std::optional<std::string> data_dir;
  std::optional<std::string> out_dir;
  std::optional<std::string> model;
  std::optional<std::size_t> window;
  bool quiet = false;
};

struct Context {
  RunConfig cfg;
  bool region_explicit = false;
  ReportFormat format = ReportFormat::Text;
};

Context make_context(const Flags& f) {
  Context ctx;
  if (!f.config.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(f.config));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ConfigError, f.config + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, e.what());
    }
    ctx.cfg = RunConfig::from_json(doc);
    ctx.region_explicit = doc.is_object() && doc.contains("region");
  }
  auto& cfg = ctx.cfg;
  if (f.region) {
    cfg.region = parse_region(*f.region);
    ctx.region_explicit = true;
  }
  if (f.seed) cfg.seed = *f.seed;
  cfg.train.seed = cfg.seed;
  if (f.data_dir) cfg.data_dir = *f.data_dir;
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (f.model) cfg.model = parse_model_kind(*f.model);
  if (f.window) {
    if (*f.window < 2) throw Error(Errc::ConfigError, "--window must be at least 2");
    cfg.window = *f.window;
  }
  try {
    ctx.format = parse_report_format(f.format);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return ctx;
}

LoadedData load(Context& ctx) {
  auto data = load_data(ctx.cfg.data_dir);
  if (!ctx.region_explicit) ctx.cfg.region = data.manifest.region;
  return data;
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

std::string series_csv(const std::map<MonthStamp, double>& values) {
  RawSeries s;
  s.observations = values;
  std::ostringstream os;
  write_series_csv(os, s);
  return os.str();
}

void note(const Flags& f, const std::string& msg) {
  if (!f.quiet) std::cerr << msg << "\n";
}

// ---------------------------------------------------------------------------

struct SynthFlags {
  std::string out;
  std::size_t months = 600;
  std::size_t series = 20;
  double noise = 0.05;
  double duration = 40.0;
};

int cmd_synth(const Flags& f, const SynthFlags& s) {
  Context ctx = make_context(f);
  RegimeSpec spec;
  spec.mean_duration_months = {s.duration, s.duration, s.duration, s.duration};
  spec.noise_sigma = s.noise;
  spec.n_series = s.series;
  spec.seed = ctx.cfg.seed;
  spec.region = ctx.cfg.region;
  auto syn = generate(spec, s.months);

  const fs::path dir = s.out.empty() ? ctx.cfg.data_dir : fs::path(s.out);
  DataManifest manifest;
  manifest.region = spec.region;
  for (const auto& series : syn.series) {
    SeriesSpec e;
    e.id = series.id;
    e.file = fs::path("series") / (series.id + ".csv");
    e.category = series.category;
    e.transform = Transform::None;
    export_series_csv(series, dir / e.file);
    manifest.series.push_back(std::move(e));
  }
  save_labels(dir / manifest.labels, syn.labels);
  manifest.save(dir / "manifest.json");

  // A run configuration that splits the generated months into thirds.
  RunConfig run = ctx.cfg;
  const auto& months = syn.labels.months();
  const std::size_t third = months.size() / 3;
  if (third == 0) throw Error(Errc::BadSpec, "too few months to split into thirds");
  run.split = SplitSpec(months[third - 1], months[2 * third - 1], months.back());
  if (!run.window) run.window = 4;
  run.preprocess.zscore = ZScoreMode::full();
  run.data_dir = dir;
  run.out_dir = dir / "out";
  write_text(dir / "run_config.json", run.to_json().dump(2) + "\n");
  note(f, "wrote " + std::to_string(syn.series.size()) + " series and " + std::to_string(months.size()) +
              " labelled months to " + dir.string());
  return kExitOk;
}

int cmd_fetch(const Flags& f, std::optional<double> max_age_hours) {
  Context ctx = make_context(f);
  const fs::path data_dir = ctx.cfg.data_dir;
  auto manifest = DataManifest::load(data_dir / "manifest.json");
  SeriesCache cache(ctx.cfg.cache_dir);
  CurlTransport transport;
  SystemClock clock;
  std::map<std::string, std::unique_ptr<FetchClient>> clients;
  FetchOptions opts;
  opts.offline = f.offline;
  if (max_age_hours) opts.max_age = std::chrono::seconds(static_cast<long long>(*max_age_hours * 3600.0));

  std::size_t fetched = 0;
  for (const auto& spec : manifest.series) {
    if (spec.provider.empty()) continue;
    auto& client = clients[spec.provider];
    if (!client) {
      ProviderConfig pc;
      pc.provider_id = spec.provider;
      // CYCLECAST_<PROVIDER>_URL points a provider at a mirror or a local stub.
      std::string url_var = api_key_env_var(spec.provider);
      url_var.replace(url_var.size() - 3, 3, "URL");
      if (const char* url = std::getenv(url_var.c_str())) {
        pc.base_url = url;
      } else if (spec.provider == "fred") {
        pc.base_url = "https://api.stlouisfed.org";
      } else if (spec.provider == "eurostat") {
        pc.base_url = "https://ec.europa.eu/eurostat/api/dissemination";
      } else {
        throw Error(Errc::ConfigError, "unknown provider '" + spec.provider + "'");
      }
      pc.api_key = api_key_from_env(spec.provider);
      pc.rate_limit_per_minute = spec.provider == "fred" ? 120.0 : 60.0;
      client = std::make_unique<FetchClient>(pc, transport, cache, clock);
    }
    auto series = client->fetch_series(spec.provider_series, manifest.region, spec.category, opts);
    series.id = spec.id;
    export_series_csv(series, data_dir / spec.file);
    ++fetched;
    note(f, spec.id + ": " + std::to_string(series.observations.size()) + " monthly observations");
  }
  note(f, "fetched " + std::to_string(fetched) + " series into " + data_dir.string());
  return kExitOk;
}

int cmd_preprocess(const Flags& f) {
  Context ctx = make_context(f);
  auto data = load(ctx);
  auto standardized = preprocess_all(data, ctx.cfg.preprocess);
  const fs::path dir = ctx.cfg.out_dir / "preprocessed";
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& s : standardized) {
    write_text(dir / (s.id + ".csv"), series_csv(s.values));
    summary[s.id] = {{"category", std::string(to_string(s.category))},
                     {"transform", std::string(to_string(s.provenance.transform))},
                     {"first_month", s.values.empty() ? "" : s.values.begin()->first.to_string()},
                     {"observations", s.values.size()}};
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  note(f, "standardized " + std::to_string(standardized.size()) + " series into " + dir.string());
  return kExitOk;
}

int cmd_build_indices(const Flags& f) {
  Context ctx = make_context(f);
  auto data = load(ctx);
  auto panel = build_panel(preprocess_all(data, ctx.cfg.preprocess));
  auto idx = build_indices(panel, data.manifest.region, ctx.cfg);
  const fs::path out = ctx.cfg.out_dir;
  write_text(out / "growth.csv", series_csv(idx.growth.values));
  write_text(out / "inflation.csv", series_csv(idx.inflation.values));
  write_text(out / "loadings.json", loadings_json(idx.growth, idx.inflation));
  note(f, "growth index: " + std::to_string(idx.growth.values.size()) + " months, inflation index: " +
              std::to_string(idx.inflation.values.size()) + " months");
  return kExitOk;
}

int cmd_features(const Flags& f) {
  Context ctx = make_context(f);
  auto data = load(ctx);
  auto panel = build_panel(preprocess_all(data, ctx.cfg.preprocess));
  auto fm = build_features(panel, ctx.cfg);
  std::ostringstream os;
  write_feature_csv(os, fm);
  write_text(ctx.cfg.out_dir / "features.csv", os.str());
  note(f, std::to_string(fm.rows()) + " months x " + std::to_string(fm.cols()) + " slope features, window " +
              std::to_string(fm.window));
  return kExitOk;
}

int cmd_train(const Flags& f) {
  Context ctx = make_context(f);
  auto data = load(ctx);
  const auto& cfg = ctx.cfg;
  auto panel = build_panel(preprocess_all(data, cfg.preprocess));
  auto fm = build_features(panel, cfg);
  auto pairs = split_pairs(forecast_alignment(fm, data.labels), cfg.effective_split());
  auto outcome = train_model(pairs, fm.feature_names, cfg);

  const fs::path out = cfg.out_dir;
  save_model(out / "model.json", outcome.model);
  std::string log;
  for (const auto& line : outcome.log) log += line + "\n";
  write_text(out / "train_log.txt", log);
  write_text(out / "run_config.json", cfg.to_json().dump(2) + "\n");
  if (!f.quiet) std::cout << log;
  note(f, "model written to " + (out / "model.json").string());
  return kExitOk;
}

int cmd_evaluate(const Flags& f, const std::string& model_path) {
  Context ctx = make_context(f);
  auto data = load(ctx);
  auto& cfg = ctx.cfg;
  const fs::path path = model_path.empty() ? cfg.out_dir / "model.json" : fs::path(model_path);
  auto model = load_model(path);
  cfg.window = model.window;

  auto panel = build_panel(preprocess_all(data, cfg.preprocess));
  auto fm = build_features(panel, cfg);
  if (model.kind != ModelKind::Rbbcp && fm.feature_names != model.feature_names) {
    throw Error(Errc::DimensionMismatch, "data series do not match the model's features");
  }
  auto pairs = split_pairs(forecast_alignment(fm, data.labels), cfg.effective_split());
  std::optional<IndexPair> idx;
  if (model.kind == ModelKind::Rbbcp) idx = build_indices(panel, data.manifest.region, cfg);
  auto ev = evaluate_model(model, pairs.test, idx ? &*idx : nullptr);

  const fs::path out = cfg.out_dir;
  write_text(out / "report.txt", render_report(ev.report, ReportFormat::Text));
  write_text(out / "report.json", render_report(ev.report, ReportFormat::Json));
  write_text(out / "report.csv", render_report(ev.report, ReportFormat::Csv));
  write_text(out / "plot.svg",
             render_phase_svg(ev, std::string(to_string(model.kind)) + " " +
                                      std::string(to_string(model.region)) + ": predicted vs true phase"));
  std::cout << render_report(ev.report, ctx.format);
  return kExitOk;
}

int cmd_predict(const Flags& f, const std::string& model_path, const std::string& month_text) {
  Context ctx = make_context(f);
  MonthStamp month;
  try {
    month = MonthStamp::parse(month_text);
  } catch (const Error&) {
    throw Error(Errc::ConfigError, "--month must look like YYYY-MM, got '" + month_text + "'");
  }
  auto data = load(ctx);
  auto& cfg = ctx.cfg;
  const fs::path path = model_path.empty() ? cfg.out_dir / "model.json" : fs::path(model_path);
  auto model = load_model(path);
  cfg.window = model.window;

  auto panel = build_panel(preprocess_all(data, cfg.preprocess));
  PhaseDistribution dist;
  if (model.kind == ModelKind::Rbbcp) {
    auto idx = build_indices(panel, data.manifest.region, cfg);
    dist = rbbcp_forecast(idx.inflation, idx.growth, month, model.rbbcp);
  } else {
    auto fm = build_features(panel, cfg);
    if (fm.feature_names != model.feature_names) {
      throw Error(Errc::DimensionMismatch, "data series do not match the model's features");
    }
    auto row = fm.row_of(month);
    if (!row) {
      throw Error(Errc::InsufficientHistory, "no complete " + std::to_string(fm.window) +
                                                 "-month feature window ends at " + month.to_string());
    }
    Eigen::VectorXd x = fm.values.row(static_cast<Eigen::Index>(*row)).transpose();
    dist = model.predict(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  const MonthStamp target = month.next();
  auto top = predict_topk(dist, 2);
  if (ctx.format == ReportFormat::Json) {
    nlohmann::ordered_json doc;
    doc["month"] = target.to_string();
    doc["model"] = std::string(to_string(model.kind));
    nlohmann::ordered_json probs = nlohmann::ordered_json::object();
    for (auto p : kAllPhases) probs[std::string(phase_name(p))] = dist[p];
    doc["probabilities"] = probs;
    doc["top2"] = {std::string(phase_name(top[0].first)), std::string(phase_name(top[1].first))};
    std::cout << doc.dump(2) << "\n";
  } else if (ctx.format == ReportFormat::Csv) {
    std::cout << "month,phase,code,probability\n";
    for (auto p : kAllPhases) {
      std::cout << target.to_string() << "," << phase_name(p) << "," << static_cast<int>(p) << ","
                << format_double(dist[p]) << "\n";
    }
  } else {
    std::cout << "forecast for " << target.to_string() << " (" << to_string(model.kind) << ")\n";
    for (auto p : kAllPhases) {
      char line[80];
      std::snprintf(line, sizeof line, "  %d %-10s %8.4f\n", static_cast<int>(p),
                    std::string(phase_name(p)).c_str(), dist[p]);
      std::cout << line;
    }
    std::cout << "top-2: " << phase_name(top[0].first) << ", " << phase_name(top[1].first) << "\n";
  }
  return kExitOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConfigError:
    case Errc::BadSpec:
    case Errc::InvalidSplit:
      return kExitConfig;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Business-cycle phase forecasting toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON run configuration");
  app.add_option("--seed", f.seed, "Random seed (overrides the config file)");
  app.add_option("--region", f.region, "Region")->check(CLI::IsMember({"us", "ez"}));
  app.add_flag("--offline", f.offline, "Never touch the network; fail on cache misses");
  app.add_option("--format", f.format, "Report format")->check(CLI::IsMember({"text", "json", "csv"}));
  app.add_option("--data-dir", f.data_dir, "Directory holding manifest.json, labels and series");
  app.add_option("--out-dir", f.out_dir, "Directory for outputs");
  app.add_option("--model", f.model, "Model kind")->check(CLI::IsMember({"rbbcp", "mlr", "svm", "mlp"}));
  app.add_option("--window", f.window, "Slope window in months");
  app.add_flag("-q,--quiet", f.quiet, "Suppress progress messages");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled dataset");
  SynthFlags sf;
  synth->add_option("--out", sf.out, "Output data directory (default: the data dir)");
  synth->add_option("--months", sf.months, "Number of months")->check(CLI::PositiveNumber);
  synth->add_option("--series", sf.series, "Number of series (half growth, half inflation)");
  synth->add_option("--noise", sf.noise, "Noise standard deviation");
  synth->add_option("--duration", sf.duration, "Mean phase duration in months");

  auto* fetch = app.add_subcommand("fetch", "Download the manifest's series from their providers");
  std::optional<double> max_age_hours;
  fetch->add_option("--max-age-hours", max_age_hours, "Refetch cached series older than this");

  auto* pre = app.add_subcommand("preprocess", "Apply stationarity transforms and z-scores");
  auto* indices = app.add_subcommand("build-indices", "Build the growth and inflation composite indices");
  auto* features = app.add_subcommand("features", "Extract slope features");
  auto* train = app.add_subcommand("train", "Train a model");

  std::string model_path;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on the test split");
  evaluate->add_option("--model-file", model_path, "Model file (default: <out-dir>/model.json)");

  std::string month;
  auto* predict = app.add_subcommand("predict", "Forecast the phase of the month after --month");
  predict->add_option("--model-file", model_path, "Model file (default: <out-dir>/model.json)");
  predict->add_option("--month", month, "Last month with data, YYYY-MM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(f, sf);
    if (fetch->parsed()) return cmd_fetch(f, max_age_hours);
    if (pre->parsed()) return cmd_preprocess(f);
    if (indices->parsed()) return cmd_build_indices(f);
    if (features->parsed()) return cmd_features(f);
    if (train->parsed()) return cmd_train(f);
    if (evaluate->parsed()) return cmd_evaluate(f, model_path);
    if (predict->parsed()) return cmd_predict(f, model_path, month);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
