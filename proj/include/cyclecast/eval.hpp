#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cyclecast/dataset.hpp"
#include "cyclecast/distribution.hpp"

namespace cyclecast {

// counts[predicted][true], rows and columns in phase-code order.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumPhases>, kNumPhases> counts{};

  std::size_t& at(PhaseLabel predicted, PhaseLabel truth) {
    return counts[phase_index(predicted)][phase_index(truth)];
  }
  std::size_t at(PhaseLabel predicted, PhaseLabel truth) const {
    return counts[phase_index(predicted)][phase_index(truth)];
  }
  std::size_t total() const noexcept;
  std::size_t diagonal() const noexcept;
  std::size_t row_sum(PhaseLabel predicted) const noexcept;
  std::size_t col_sum(PhaseLabel truth) const noexcept;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct FScores {
  std::array<double, kNumPhases> per_class{};
  double macro = 0.0;
  double weighted = 0.0;

  friend bool operator==(const FScores&, const FScores&) = default;
};

// Fraction of exact matches.
double accuracy(std::span<const PhaseLabel> preds, std::span<const PhaseLabel> truth);

// Fraction of samples whose true phase is among the k most probable.
double topk_accuracy(std::span<const PhaseDistribution> dists, std::span<const PhaseLabel> truth,
                     std::size_t k);

// Mean probability mass assigned to the k most probable phases.
double topk_mass(std::span<const PhaseDistribution> dists, std::size_t k);

ConfusionMatrix confusion_matrix(std::span<const PhaseLabel> preds, std::span<const PhaseLabel> truth);

// Precision over predicted rows, recall over true columns; F = 0 when P + R = 0.
// Weighted F uses true-label support.
FScores f_scores(const ConfusionMatrix& cm);

// Accuracy after mapping {slowdown, recession} -> downswing, {recovery, expansion} -> upswing.
double collapse_two_label(std::span<const PhaseLabel> preds, std::span<const PhaseLabel> truth);
double collapse_two_label(const ConfusionMatrix& cm);

struct EvaluationReport {
  std::string model;
  std::string region;
  ConfusionMatrix confusion;
  FScores f;
  double top1 = 0.0;
  std::optional<double> top2;  // absent for one-hot predictors
  double two_label_accuracy = 0.0;
  std::size_t samples = 0;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// top2 is omitted when `has_top2` is false.
EvaluationReport evaluate(std::span<const PhaseDistribution> dists, std::span<const PhaseLabel> truth,
                          bool has_top2 = true);

// Builds a report straight from a confusion matrix (no distributions, so no top2).
EvaluationReport report_from_confusion(const ConfusionMatrix& cm);

enum class ReportFormat { Text, Json, Csv };
ReportFormat parse_report_format(std::string_view text);

std::string render_report(const EvaluationReport& report, ReportFormat format);
EvaluationReport parse_report_json(std::string_view json);

// "75.00%"
std::string format_percent(double fraction);

}  // namespace cyclecast
