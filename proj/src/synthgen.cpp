#include "cyclecast/synthgen.hpp"

#include <cmath>

#include "cyclecast/error.hpp"
#include "cyclecast/random.hpp"

namespace cyclecast {

void RegimeSpec::validate() const {
  for (double d : mean_duration_months) {
    if (!(d >= 1.0) || !std::isfinite(d)) throw Error(Errc::BadSpec, "mean durations must be >= 1");
  }
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(Errc::BadSpec, "noise_sigma must be positive");
  }
  if (n_series < 2) throw Error(Errc::BadSpec, "need at least one growth and one inflation series");
  for (const auto& d : drift) {
    if (!std::isfinite(d.growth) || !std::isfinite(d.inflation)) throw Error(Errc::BadSpec, "non-finite drift");
  }
}

SyntheticData generate(const RegimeSpec& spec, std::size_t n_months) {
  spec.validate();
  double longest = 0.0;
  for (double d : spec.mean_duration_months) longest = std::max(longest, d);
  if (static_cast<double>(n_months) < longest) {
    throw Error(Errc::BadSpec, "n_months shorter than the longest mean duration");
  }

  Rng regime_rng(spec.seed);
  Rng shock_rng(spec.seed * 0x9E3779B97F4A7C15ULL + 1);
  Rng series_rng(spec.seed * 0xBF58476D1CE4E5B9ULL + 2);

  std::vector<MonthStamp> months;
  std::vector<PhaseLabel> labels;
  PhaseLabel phase = spec.first_phase;
  while (labels.size() < n_months) {
    int duration = regime_rng.geometric(1.0 / spec.mean_duration_months[phase_index(phase)]);
    for (int i = 0; i < duration && labels.size() < n_months; ++i) {
      months.push_back(spec.start.plus(static_cast<int>(labels.size())));
      labels.push_back(phase);
    }
    phase = next_phase(phase);
  }

  SyntheticData out;
  out.latent_growth.resize(n_months);
  out.latent_inflation.resize(n_months);
  double g = 0.0;
  double pi = 0.0;
  for (std::size_t t = 0; t < n_months; ++t) {
    const auto& d = spec.drift[phase_index(labels[t])];
    g += d.growth + spec.noise_sigma * shock_rng.normal();
    pi += d.inflation + spec.noise_sigma * shock_rng.normal();
    out.latent_growth[t] = g;
    out.latent_inflation[t] = pi;
  }

  const std::size_t n_growth = (spec.n_series + 1) / 2;
  for (std::size_t j = 0; j < spec.n_series; ++j) {
    const bool growth = j < n_growth;
    RawSeries s;
    char id[32];
    std::snprintf(id, sizeof id, "%s%02zu", growth ? "growth_" : "inflation_", growth ? j : j - n_growth);
    s.id = id;
    s.region = spec.region;
    s.category = growth ? Category::Growth : Category::Inflation;
    const double loading = series_rng.uniform(0.5, 1.5);
    const double offset = series_rng.uniform(-5.0, 5.0);
    out.loadings.push_back(loading);
    const auto& latent = growth ? out.latent_growth : out.latent_inflation;
    for (std::size_t t = 0; t < n_months; ++t) {
      s.observations.emplace_hint(s.observations.end(), months[t],
                                  offset + loading * latent[t] + spec.noise_sigma * series_rng.normal());
    }
    out.series.push_back(std::move(s));
  }
  out.labels = LabeledDataset(spec.region, std::move(months), std::move(labels));
  return out;
}

}  // namespace cyclecast
