#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cyclecast/dataset.hpp"

namespace cyclecast {

// Probability vector over the four phases, indexed by phase_index().
class PhaseDistribution {
 public:
  PhaseDistribution();  // uniform
  // Throws DegenerateInput unless every entry is >= 0 and they sum to 1 +- 1e-9.
  explicit PhaseDistribution(const std::array<double, kNumPhases>& p);

  double operator[](PhaseLabel phase) const noexcept { return p_[phase_index(phase)]; }
  const std::array<double, kNumPhases>& probabilities() const noexcept { return p_; }

  // Most probable phase; ties go to the lowest phase code.
  PhaseLabel argmax() const noexcept;

  friend bool operator==(const PhaseDistribution&, const PhaseDistribution&) = default;

 private:
  std::array<double, kNumPhases> p_;
};

// Numerically stable softmax.
PhaseDistribution softmax(std::span<const double, kNumPhases> logits);

using RankedPhase = std::pair<PhaseLabel, double>;

// k most probable phases, descending probability, ties by ascending code. Throws BadK.
std::vector<RankedPhase> predict_topk(const PhaseDistribution& dist, std::size_t k);

}  // namespace cyclecast
