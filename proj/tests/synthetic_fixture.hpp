#pragma once

// Synthetic data set and run configuration used by the end-to-end tests: four
// 40-month phases on average, 20 series, 600 months split into thirds.

#include "cyclecast/pipeline.hpp"
#include "cyclecast/synthgen.hpp"

namespace testing {

struct SyntheticRun {
  cyclecast::SyntheticData synthetic;
  cyclecast::LoadedData data;
  cyclecast::RunConfig config;
};

inline cyclecast::RegimeSpec synthetic_spec(std::uint64_t seed = 1) {
  cyclecast::RegimeSpec spec;
  spec.mean_duration_months = {40.0, 40.0, 40.0, 40.0};
  spec.noise_sigma = 0.05;
  spec.n_series = 20;
  spec.seed = seed;
  return spec;
}

inline SyntheticRun synthetic_run(std::uint64_t seed = 1, std::size_t months = 600) {
  using namespace cyclecast;
  SyntheticRun run;
  run.synthetic = generate(synthetic_spec(seed), months);
  run.data.manifest.region = Region::US;
  for (const auto& s : run.synthetic.series) {
    SeriesSpec spec;
    spec.id = s.id;
    spec.file = "series/" + s.id + ".csv";
    spec.category = s.category;
    spec.transform = Transform::None;
    run.data.manifest.series.push_back(spec);
  }
  run.data.labels = run.synthetic.labels;
  run.data.raw = run.synthetic.series;
  run.config.window = 4;
  run.config.preprocess.zscore = ZScoreMode::full();
  run.config.seed = seed;
  const auto& m = run.synthetic.labels.months();
  const std::size_t third = months / 3;
  run.config.split = SplitSpec(m[third - 1], m[2 * third - 1], m[months - 1]);
  return run;
}

}  // namespace testing
