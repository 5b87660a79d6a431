#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cyclecast/dataset.hpp"
#include "cyclecast/preprocess.hpp"

namespace cyclecast {

struct PcaResult {
  Eigen::VectorXd loadings;  // unit norm, one weight per column
  Eigen::VectorXd scores;    // centered panel times loadings
  double eigenvalue = 0.0;
  double explained_variance_ratio = 0.0;
  int iterations = 0;
};

struct PowerIterationOptions {
  double tolerance = 1e-12;
  int max_iterations = 10'000;
};

// Leading eigenpair of the sample covariance by power iteration. Columns are
// centered internally. Loadings are oriented so the first nonzero entry is positive.
PcaResult pca_first_component(const Eigen::MatrixXd& panel, PowerIterationOptions opts = {});

// Flips loadings and scores so loadings[reference_column] > 0.
PcaResult sign_normalize(PcaResult r, std::size_t reference_column);

struct ExpandingPcaOptions {
  std::size_t min_window_months = 60;
  std::size_t reference_column = 0;
  // Divide each column by its Newey-West long-run scale (computed causally
  // from rows up to t) before each PCA fit.
  bool long_run_weighting = true;
  std::optional<std::size_t> nw_lag;
  std::size_t subsample_stride = 3;
};

struct ExpandingPcaOutput {
  std::size_t first_row = 0;  // row of the first emitted value
  std::vector<double> values;
  PcaResult last_fit;  // fit on the full panel, for inspection
};

// values[i] is the last score of the PCA fit on rows [0, first_row + i].
ExpandingPcaOutput expanding_pca(const Eigen::MatrixXd& panel, const ExpandingPcaOptions& opts);

enum class IndexKind { Growth, Inflation };
std::string_view to_string(IndexKind k) noexcept;

struct CompositeIndex {
  IndexKind kind = IndexKind::Growth;
  Region region = Region::US;
  std::map<MonthStamp, double> values;
  std::size_t min_window_months = 60;
  std::vector<std::string> series_ids;
  Eigen::VectorXd final_loadings;
  double final_explained_variance_ratio = 0.0;

  // Last `window` values ending at `month`, or nullopt if history is short.
  std::optional<std::vector<double>> window_ending(MonthStamp month, std::size_t window) const;
};

// Panel must have every entry available (see Panel::trim_to_common_start).
CompositeIndex expanding_pca_index(const Panel& panel, IndexKind kind, Region region,
                                   const ExpandingPcaOptions& opts);

// Overload with default options and reference column 0.
CompositeIndex expanding_pca_index(const Panel& panel, std::size_t min_window_months = 60);

// `year,month,value`
void write_index_csv(std::ostream& out, const CompositeIndex& index);
CompositeIndex read_index_csv(std::istream& in, IndexKind kind, Region region);
std::string loadings_json(const CompositeIndex& growth, const CompositeIndex& inflation);

}  // namespace cyclecast
