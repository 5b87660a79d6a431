#include "cyclecast/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cyclecast/error.hpp"

namespace cyclecast {

PhaseDistribution::PhaseDistribution() { p_.fill(1.0 / static_cast<double>(kNumPhases)); }

PhaseDistribution::PhaseDistribution(const std::array<double, kNumPhases>& p) : p_(p) {
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(Errc::DegenerateInput, "probabilities must be finite and non-negative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::DegenerateInput, "probabilities must sum to 1");
  }
}

PhaseLabel PhaseDistribution::argmax() const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumPhases; ++i) {
    if (p_[i] > p_[best]) best = i;
  }
  return phase_from_index(best);
}

PhaseDistribution softmax(std::span<const double, kNumPhases> logits) {
  double hi = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumPhases> p{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumPhases; ++i) {
    p[i] = std::exp(logits[i] - hi);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return PhaseDistribution(p);
}

std::vector<RankedPhase> predict_topk(const PhaseDistribution& dist, std::size_t k) {
  if (k < 1 || k > kNumPhases) throw Error(Errc::BadK, "k must be in 1..4, got " + std::to_string(k));
  std::array<std::size_t, kNumPhases> order{};
  std::iota(order.begin(), order.end(), 0);
  const auto& p = dist.probabilities();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  std::vector<RankedPhase> out;
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(phase_from_index(order[i]), p[order[i]]);
  return out;
}

}  // namespace cyclecast
