#include "cyclecast/eval.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cyclecast/error.hpp"

namespace cyclecast {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::LengthMismatch, std::to_string(a) + " predictions vs " + std::to_string(b) + " labels");
  }
}

bool is_upswing(PhaseLabel p) noexcept {
  return p == PhaseLabel::Recovery || p == PhaseLabel::Expansion;
}

// Column order of the F-score rows.
constexpr std::array<PhaseLabel, kNumPhases> kTableOrder = {
    PhaseLabel::Expansion, PhaseLabel::Recovery, PhaseLabel::Recession, PhaseLabel::Slowdown};

}  // namespace

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::size_t ConfusionMatrix::diagonal() const noexcept {
  std::size_t t = 0;
  for (std::size_t i = 0; i < kNumPhases; ++i) t += counts[i][i];
  return t;
}

std::size_t ConfusionMatrix::row_sum(PhaseLabel predicted) const noexcept {
  std::size_t t = 0;
  for (auto c : counts[phase_index(predicted)]) t += c;
  return t;
}

std::size_t ConfusionMatrix::col_sum(PhaseLabel truth) const noexcept {
  std::size_t t = 0;
  for (const auto& row : counts) t += row[phase_index(truth)];
  return t;
}

double accuracy(std::span<const PhaseLabel> preds, std::span<const PhaseLabel> truth) {
  check_lengths(preds.size(), truth.size());
  if (preds.empty()) throw Error(Errc::Empty, "accuracy of zero samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double topk_accuracy(std::span<const PhaseDistribution> dists, std::span<const PhaseLabel> truth,
                     std::size_t k) {
  if (k < 1 || k > kNumPhases) throw Error(Errc::BadK, "k must be in 1..4, got " + std::to_string(k));
  check_lengths(dists.size(), truth.size());
  if (dists.empty()) throw Error(Errc::Empty, "accuracy of zero samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    for (const auto& [phase, p] : predict_topk(dists[i], k)) {
      if (phase == truth[i]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(dists.size());
}

double topk_mass(std::span<const PhaseDistribution> dists, std::size_t k) {
  if (k < 1 || k > kNumPhases) throw Error(Errc::BadK, "k must be in 1..4, got " + std::to_string(k));
  if (dists.empty()) throw Error(Errc::Empty, "no distributions");
  double acc = 0.0;
  for (const auto& d : dists) {
    for (const auto& [phase, p] : predict_topk(d, k)) acc += p;
  }
  return acc / static_cast<double>(dists.size());
}

ConfusionMatrix confusion_matrix(std::span<const PhaseLabel> preds, std::span<const PhaseLabel> truth) {
  check_lengths(preds.size(), truth.size());
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) ++cm.at(preds[i], truth[i]);
  return cm;
}

FScores f_scores(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(Errc::EmptyMatrix, "confusion matrix has no samples");
  FScores out;
  for (auto phase : kAllPhases) {
    const double tp = static_cast<double>(cm.at(phase, phase));
    const std::size_t row = cm.row_sum(phase);
    const std::size_t col = cm.col_sum(phase);
    const double precision = row ? tp / static_cast<double>(row) : 0.0;
    const double recall = col ? tp / static_cast<double>(col) : 0.0;
    const double f = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    out.per_class[phase_index(phase)] = f;
    out.weighted += f * static_cast<double>(col) / static_cast<double>(total);
  }
  double sum = 0.0;
  for (double f : out.per_class) sum += f;
  out.macro = sum / static_cast<double>(kNumPhases);
  return out;
}

double collapse_two_label(std::span<const PhaseLabel> preds, std::span<const PhaseLabel> truth) {
  check_lengths(preds.size(), truth.size());
  if (preds.empty()) throw Error(Errc::Empty, "accuracy of zero samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += is_upswing(preds[i]) == is_upswing(truth[i]);
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double collapse_two_label(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(Errc::EmptyMatrix, "confusion matrix has no samples");
  std::size_t hits = 0;
  for (auto pred : kAllPhases) {
    for (auto truth : kAllPhases) {
      if (is_upswing(pred) == is_upswing(truth)) hits += cm.at(pred, truth);
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

EvaluationReport evaluate(std::span<const PhaseDistribution> dists, std::span<const PhaseLabel> truth,
                          bool has_top2) {
  check_lengths(dists.size(), truth.size());
  std::vector<PhaseLabel> preds;
  preds.reserve(dists.size());
  for (const auto& d : dists) preds.push_back(d.argmax());
  EvaluationReport r;
  r.confusion = confusion_matrix(preds, truth);
  r.f = f_scores(r.confusion);
  r.top1 = topk_accuracy(dists, truth, 1);
  if (has_top2) r.top2 = topk_accuracy(dists, truth, 2);
  r.two_label_accuracy = collapse_two_label(preds, truth);
  r.samples = dists.size();
  return r;
}

EvaluationReport report_from_confusion(const ConfusionMatrix& cm) {
  EvaluationReport r;
  r.confusion = cm;
  r.f = f_scores(cm);
  r.samples = cm.total();
  r.top1 = static_cast<double>(cm.diagonal()) / static_cast<double>(r.samples);
  r.two_label_accuracy = collapse_two_label(cm);
  return r;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::Text;
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  throw Error(Errc::ConfigError, "unknown report format '" + std::string(text) + "'");
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
  return buf;
}

namespace {

std::string render_text(const EvaluationReport& r) {
  std::ostringstream os;
  char line[160];
  os << "model: " << (r.model.empty() ? "-" : r.model) << "  region: " << (r.region.empty() ? "-" : r.region)
     << "  samples: " << r.samples << "\n\n";
  std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %10s %10s %10s %8s %8s %10s\n", "", "expansion",
                "recovery", "recession", "slowdown", "f-macro", "f-weighted", "Acc.T1", "Acc.T2", "two-label");
  os << line;
  auto pc = [&](PhaseLabel p) { return format_percent(r.f.per_class[phase_index(p)]); };
  std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %10s %10s %10s %8s %8s %10s\n",
                r.model.empty() ? "model" : r.model.c_str(), pc(PhaseLabel::Expansion).c_str(),
                pc(PhaseLabel::Recovery).c_str(), pc(PhaseLabel::Recession).c_str(),
                pc(PhaseLabel::Slowdown).c_str(), format_percent(r.f.macro).c_str(),
                format_percent(r.f.weighted).c_str(), format_percent(r.top1).c_str(),
                r.top2 ? format_percent(*r.top2).c_str() : "--",
                format_percent(r.two_label_accuracy).c_str());
  os << line << "\nconfusion matrix (rows = predicted, columns = true label)\n";
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s\n", "Pred.\\Labels", "recov.", "expans.",
                "slowd.", "reces.");
  os << line;
  for (auto pred : kAllPhases) {
    std::snprintf(line, sizeof line, "%-12s %8zu %8zu %8zu %8zu\n", std::string(phase_name(pred)).c_str(),
                  r.confusion.at(pred, PhaseLabel::Recovery), r.confusion.at(pred, PhaseLabel::Expansion),
                  r.confusion.at(pred, PhaseLabel::Slowdown), r.confusion.at(pred, PhaseLabel::Recession));
    os << line;
  }
  return os.str();
}

std::string render_json(const EvaluationReport& r) {
  nlohmann::ordered_json doc;
  doc["schema"] = "cyclecast.report";
  doc["version"] = 1;
  doc["model"] = r.model;
  doc["region"] = r.region;
  doc["samples"] = r.samples;
  nlohmann::ordered_json f;
  for (auto p : kTableOrder) f[std::string(phase_name(p))] = r.f.per_class[phase_index(p)];
  doc["f_score"] = f;
  doc["f_macro"] = r.f.macro;
  doc["f_weighted"] = r.f.weighted;
  doc["top1"] = r.top1;
  doc["top2"] = r.top2 ? nlohmann::ordered_json(*r.top2) : nlohmann::ordered_json(nullptr);
  doc["two_label_accuracy"] = r.two_label_accuracy;
  nlohmann::ordered_json cm = nlohmann::ordered_json::array();
  for (const auto& row : r.confusion.counts) cm.push_back(row);
  doc["confusion"] = {{"orientation", "rows=predicted,columns=true"},
                      {"order", {"recovery", "expansion", "slowdown", "recession"}},
                      {"counts", cm}};
  return doc.dump(2) + "\n";
}

std::string render_csv(const EvaluationReport& r) {
  std::ostringstream os;
  os << "metric,value,support\n";
  for (auto p : kAllPhases) {
    os << phase_name(p) << ',' << format_double(r.f.per_class[phase_index(p)]) << ','
       << r.confusion.col_sum(p) << '\n';
  }
  os << "macro," << format_double(r.f.macro) << ',' << r.samples << '\n';
  os << "weighted," << format_double(r.f.weighted) << ',' << r.samples << '\n';
  os << "top1," << format_double(r.top1) << ',' << r.samples << '\n';
  os << "top2," << (r.top2 ? format_double(*r.top2) : std::string()) << ',' << r.samples << '\n';
  os << "two_label," << format_double(r.two_label_accuracy) << ',' << r.samples << '\n';
  return os.str();
}

}  // namespace

std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Text: return render_text(report);
    case ReportFormat::Json: return render_json(report);
    case ReportFormat::Csv: return render_csv(report);
  }
  return {};
}

EvaluationReport parse_report_json(std::string_view text) {
  try {
    auto doc = nlohmann::json::parse(text);
    if (doc.at("schema") != "cyclecast.report") throw Error(Errc::CorruptFile, "not a report");
    if (doc.at("version").get<int>() > 1) throw Error(Errc::VersionMismatch, "report version");
    EvaluationReport r;
    r.model = doc.at("model").get<std::string>();
    r.region = doc.at("region").get<std::string>();
    r.samples = doc.at("samples").get<std::size_t>();
    for (auto p : kAllPhases) r.f.per_class[phase_index(p)] = doc.at("f_score").at(std::string(phase_name(p)));
    r.f.macro = doc.at("f_macro");
    r.f.weighted = doc.at("f_weighted");
    r.top1 = doc.at("top1");
    if (!doc.at("top2").is_null()) r.top2 = doc.at("top2").get<double>();
    r.two_label_accuracy = doc.at("two_label_accuracy");
    const auto& counts = doc.at("confusion").at("counts");
    for (std::size_t i = 0; i < kNumPhases; ++i) {
      for (std::size_t j = 0; j < kNumPhases; ++j) r.confusion.counts[i][j] = counts.at(i).at(j);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptFile, e.what());
  }
}

}  // namespace cyclecast
