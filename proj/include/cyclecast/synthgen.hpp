#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cyclecast/dataset.hpp"

namespace cyclecast {

// Drift of the (growth, inflation) latent factors per phase.
struct PhaseDrift {
  double growth = 0.0;
  double inflation = 0.0;
};

struct RegimeSpec {
  // Indexed by phase_index(); durations are geometric with these means.
  std::array<double, kNumPhases> mean_duration_months = {24.0, 36.0, 18.0, 15.0};
  // Signs follow the phase semantics: expansion (+,+), slowdown (-,+),
  // recession (-,-), recovery (+,-).
  std::array<PhaseDrift, kNumPhases> drift = {{{+1.0, -1.0}, {+1.0, +1.0}, {-1.0, +1.0}, {-1.0, -1.0}}};
  double noise_sigma = 0.1;
  std::size_t n_series = 20;
  std::uint64_t seed = 1;
  Region region = Region::US;
  MonthStamp start{1970, 1};
  PhaseLabel first_phase = PhaseLabel::Recovery;

  // Throws BadSpec.
  void validate() const;
};

// Recovery -> Expansion -> Slowdown -> Recession -> Recovery
constexpr PhaseLabel next_phase(PhaseLabel p) noexcept {
  return phase_from_index((phase_index(p) + 1) % kNumPhases);
}

struct SyntheticData {
  LabeledDataset labels;
  std::vector<RawSeries> series;  // first half growth-loaded, second half inflation-loaded
  std::vector<double> latent_growth;
  std::vector<double> latent_inflation;
  std::vector<double> loadings;
};

// Latent factors follow per-phase drift plus N(0, noise_sigma^2) shocks; each
// observable is a positive loading on one latent plus idiosyncratic noise of the same scale.
SyntheticData generate(const RegimeSpec& spec, std::size_t n_months);

}  // namespace cyclecast
