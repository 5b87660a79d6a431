#pragma once

// Confusion matrices of the MLR model on the two test sets, rows = predicted,
// columns = true label, both in phase-code order (recovery, expansion,
// slowdown, recession).

#include "cyclecast/eval.hpp"

namespace testing {

inline cyclecast::ConfusionMatrix us_mlr_confusion() {
  cyclecast::ConfusionMatrix cm;
  cm.counts = {{{9, 19, 0, 2}, {2, 70, 2, 1}, {0, 0, 6, 2}, {0, 0, 7, 20}}};
  return cm;
}

inline cyclecast::ConfusionMatrix ez_mlr_confusion() {
  cyclecast::ConfusionMatrix cm;
  cm.counts = {{{12, 2, 0, 4}, {8, 34, 4, 0}, {2, 5, 11, 3}, {5, 3, 5, 20}}};
  return cm;
}

// Expands a confusion matrix back into (predicted, true) label sequences.
inline void sequences_of(const cyclecast::ConfusionMatrix& cm, std::vector<cyclecast::PhaseLabel>& preds,
                         std::vector<cyclecast::PhaseLabel>& truth) {
  preds.clear();
  truth.clear();
  for (auto p : cyclecast::kAllPhases) {
    for (auto t : cyclecast::kAllPhases) {
      for (std::size_t k = 0; k < cm.at(p, t); ++k) {
        preds.push_back(p);
        truth.push_back(t);
      }
    }
  }
}

}  // namespace testing
