#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "cyclecast/eval.hpp"
#include "cyclecast/random.hpp"
#include "reference_matrices.hpp"
#include "test_support.hpp"

using namespace cyclecast;
using testing::error_code_of;

namespace {

constexpr PhaseLabel R1 = PhaseLabel::Recovery;
constexpr PhaseLabel R2 = PhaseLabel::Expansion;
constexpr PhaseLabel R3 = PhaseLabel::Slowdown;
constexpr PhaseLabel R4 = PhaseLabel::Recession;

double pct(double x) { return 100.0 * x; }

PhaseDistribution random_distribution(Rng& rng) {
  std::array<double, 4> p;
  double s = 0;
  for (auto& v : p) s += v = -std::log(1.0 - rng.uniform());
  for (auto& v : p) v /= s;
  // Renormalize the rounding residue into the last entry.
  p[3] = 1.0 - p[0] - p[1] - p[2];
  if (p[3] < 0) p[3] = 0;
  return PhaseDistribution(p);
}

std::vector<PhaseLabel> argmaxes(const std::vector<PhaseDistribution>& d) {
  std::vector<PhaseLabel> out;
  for (const auto& x : d) out.push_back(x.argmax());
  return out;
}

}  // namespace

TEST_CASE("accuracy basics") {
  std::vector<PhaseLabel> t = {R1, R2, R3, R4, R2};
  CHECK(accuracy(t, t) == 1.0);
  std::vector<PhaseLabel> wrong = {R2, R3, R4, R1, R1};
  CHECK(accuracy(wrong, t) == 0.0);
  std::vector<PhaseLabel> shorter = {R1};
  CHECK(error_code_of([&] { accuracy(shorter, t); }) == Errc::LengthMismatch);
  std::vector<PhaseLabel> none;
  CHECK(error_code_of([&] { accuracy(none, none); }) == Errc::Empty);
}

TEST_CASE("US confusion matrix reproduces the reference scores") {
  auto cm = testing::us_mlr_confusion();
  CHECK(cm.total() == 140);
  CHECK(cm.diagonal() == 105);
  std::vector<PhaseLabel> p, t;
  testing::sequences_of(cm, p, t);
  CHECK(accuracy(p, t) == 0.75);
  auto f = f_scores(cm);
  CHECK(std::abs(pct(f.per_class[phase_index(R2)]) - 85.36) <= 0.01);
  CHECK(std::abs(pct(f.per_class[phase_index(R1)]) - 43.90) <= 0.01);
  CHECK(std::abs(pct(f.per_class[phase_index(R4)]) - 76.92) <= 0.01);
  CHECK(std::abs(pct(f.per_class[phase_index(R3)]) - 52.17) <= 0.01);
  CHECK(std::abs(pct(f.macro) - 64.59) <= 0.01);
  // Expansion by hand: P = 70/75, R = 70/89.
  const double prec = 70.0 / 75.0, rec = 70.0 / 89.0;
  CHECK(f.per_class[phase_index(R2)] == doctest::Approx(2 * prec * rec / (prec + rec)).epsilon(1e-15));
  CHECK(std::abs(pct(collapse_two_label(cm)) - 96.43) <= 0.01);
  CHECK(collapse_two_label(p, t) == collapse_two_label(cm));
}

TEST_CASE("EZ confusion matrix reproduces the reference scores") {
  auto cm = testing::ez_mlr_confusion();
  CHECK(cm.total() == 118);
  auto f = f_scores(cm);
  CHECK(std::abs(pct(f.per_class[phase_index(R2)]) - 75.55) <= 0.02);
  CHECK(std::abs(pct(f.per_class[phase_index(R1)]) - 53.33) <= 0.01);
  CHECK(std::abs(pct(f.per_class[phase_index(R4)]) - 66.66) <= 0.01);
  CHECK(std::abs(pct(f.per_class[phase_index(R3)]) - 53.66) <= 0.01);
  CHECK(std::abs(pct(f.macro) - 62.30) <= 0.01);
  CHECK(std::abs(pct(static_cast<double>(cm.diagonal()) / cm.total()) - 65.25) <= 0.01);
  CHECK(std::abs(pct(collapse_two_label(cm)) - 80.51) <= 0.01);
}

TEST_CASE("F is zero when a class is never predicted nor present") {
  ConfusionMatrix cm;
  cm.at(R1, R1) = 3;
  cm.at(R2, R1) = 1;
  auto f = f_scores(cm);
  CHECK(f.per_class[phase_index(R3)] == 0.0);
  CHECK(f.per_class[phase_index(R2)] == 0.0);
  CHECK(f.per_class[phase_index(R1)] == doctest::Approx(2 * 1.0 * 0.75 / 1.75));
  CHECK(f.weighted == doctest::Approx(f.per_class[0]));
  CHECK(error_code_of([] { f_scores(ConfusionMatrix{}); }) == Errc::EmptyMatrix);
}

TEST_CASE("confusion matrix orientation") {
  std::vector<PhaseLabel> p = {R3}, t = {R4};
  auto cm = confusion_matrix(p, t);
  CHECK(cm.at(R3, R4) == 1);
  CHECK(cm.total() == 1);

  std::vector<PhaseLabel> perfect;
  const std::size_t counts[] = {2, 3, 4, 5};
  for (auto ph : kAllPhases) perfect.insert(perfect.end(), counts[phase_index(ph)], ph);
  auto diag = confusion_matrix(perfect, perfect);
  for (auto a : kAllPhases) {
    for (auto b : kAllPhases) CHECK(diag.at(a, b) == (a == b ? counts[phase_index(a)] : 0));
  }
}

TEST_CASE("top-k examples") {
  std::vector<PhaseDistribution> d = {PhaseDistribution({0.5, 0.3, 0.1, 0.1})};
  std::vector<PhaseLabel> t = {R2};
  CHECK(topk_accuracy(d, t, 1) == 0.0);
  CHECK(topk_accuracy(d, t, 2) == 1.0);
  CHECK(topk_accuracy(d, t, 4) == 1.0);
  CHECK(topk_mass(d, 2) == doctest::Approx(0.8));
  CHECK(error_code_of([&] { topk_accuracy(d, t, 0); }) == Errc::BadK);
  CHECK(error_code_of([&] { topk_accuracy(d, t, 5); }) == Errc::BadK);
}

TEST_CASE("two-label collapse examples") {
  std::vector<PhaseLabel> p = {R3}, t = {R4};
  CHECK(collapse_two_label(p, t) == 1.0);
  p = {R2};
  CHECK(collapse_two_label(p, t) == 0.0);
}

TEST_CASE("evaluation laws on random prediction sets") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 200));
    std::vector<PhaseDistribution> d;
    std::vector<PhaseLabel> t;
    for (std::size_t i = 0; i < n; ++i) {
      d.push_back(random_distribution(rng));
      t.push_back(phase_from_index(static_cast<std::size_t>(rng.uniform(0, 4)) % 4));
    }
    auto preds = argmaxes(d);
    double prev = 0.0;
    for (std::size_t k = 1; k <= 4; ++k) {
      double a = topk_accuracy(d, t, k);
      CHECK(a >= prev);
      prev = a;
    }
    CHECK(topk_accuracy(d, t, 4) == 1.0);
    auto cm = confusion_matrix(preds, t);
    CHECK(cm.total() == n);
    CHECK(static_cast<double>(cm.diagonal()) / static_cast<double>(n) == topk_accuracy(d, t, 1));
    CHECK(accuracy(preds, t) == topk_accuracy(d, t, 1));
    auto r = evaluate(d, t);
    const double mean_f = std::accumulate(r.f.per_class.begin(), r.f.per_class.end(), 0.0) / 4.0;
    CHECK(std::abs(r.f.macro - mean_f) <= 1e-12);
    CHECK(*r.top2 >= r.top1);
    CHECK(collapse_two_label(preds, t) >= accuracy(preds, t));
    CHECK(r.two_label_accuracy >= r.top1);
  }
}

TEST_CASE("text report formatting") {
  auto r = report_from_confusion(testing::us_mlr_confusion());
  r.model = "mlr";
  r.region = "US";
  CHECK(r.top1 == 0.75);
  CHECK_FALSE(r.top2);
  auto text = render_report(r, ReportFormat::Text);
  CHECK(text.find("75.00%") != std::string::npos);
  CHECK(text.find("85.37%") != std::string::npos);
  CHECK(text.find("--") != std::string::npos);
  CHECK(text.find("rows = predicted") != std::string::npos);
  CHECK(format_percent(0.4390243902) == "43.90%");
  CHECK(format_percent(1.0) == "100.00%");
}

TEST_CASE("perfect predictions report 100.00%") {
  std::vector<PhaseDistribution> d;
  std::vector<PhaseLabel> t;
  for (auto p : kAllPhases) {
    std::array<double, 4> one_hot{};
    one_hot[phase_index(p)] = 1.0;
    d.push_back(PhaseDistribution(one_hot));
    t.push_back(p);
  }
  auto r = evaluate(d, t);
  CHECK(r.f.macro == 1.0);
  auto text = render_report(r, ReportFormat::Text);
  CHECK(text.find("100.00%") != std::string::npos);
  CHECK(text.find("0.00%") == text.find("100.00%") + 2);
}

TEST_CASE("JSON report round-trips and agrees with CSV") {
  Rng rng(3);
  std::vector<PhaseDistribution> d;
  std::vector<PhaseLabel> t;
  for (int i = 0; i < 57; ++i) {
    d.push_back(random_distribution(rng));
    t.push_back(phase_from_index(static_cast<std::size_t>(i % 4)));
  }
  auto r = evaluate(d, t);
  r.model = "svm";
  r.region = "EZ";
  CHECK(parse_report_json(render_report(r, ReportFormat::Json)) == r);

  auto csv = render_report(r, ReportFormat::Csv);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "metric,value,support");
  std::map<std::string, double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    auto a = line.find(','), b = line.find(',', a + 1);
    values[line.substr(0, a)] = std::stod(line.substr(a + 1, b - a - 1));
  }
  CHECK(rows == 9);
  CHECK(values["expansion"] == r.f.per_class[phase_index(R2)]);
  CHECK(values["macro"] == r.f.macro);
  CHECK(values["weighted"] == r.f.weighted);
  CHECK(values["top1"] == r.top1);
  CHECK(values["top2"] == *r.top2);
  CHECK(values["two_label"] == r.two_label_accuracy);

  auto without_top2 = evaluate(d, t, false);
  CHECK(parse_report_json(render_report(without_top2, ReportFormat::Json)) == without_top2);
}

TEST_CASE("report JSON validation") {
  CHECK(error_code_of([] { parse_report_json("{"); }) == Errc::CorruptFile);
  CHECK(error_code_of([] { parse_report_json(R"({"schema":"cyclecast.report","version":9})"); }) ==
        Errc::VersionMismatch);
  CHECK(parse_report_format("csv") == ReportFormat::Csv);
  CHECK(error_code_of([] { parse_report_format("xml"); }) == Errc::ConfigError);
}
