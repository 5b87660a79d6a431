#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cyclecast/dataset.hpp"

namespace cyclecast {

enum class ZScoreKind { Full, Expanding };

struct ZScoreMode {
  ZScoreKind kind = ZScoreKind::Expanding;
  // Expanding mode only: first value is emitted once this many points are seen.
  std::size_t min_window = 24;

  static ZScoreMode full() { return {ZScoreKind::Full, 0}; }
  static ZScoreMode expanding(std::size_t min_window) { return {ZScoreKind::Expanding, min_window}; }
};

struct Provenance {
  Transform transform = Transform::None;
  ZScoreMode zscore_mode;
  std::optional<std::size_t> nw_lag;
  std::optional<std::size_t> subsample_stride;
};

struct StandardizedSeries {
  std::string id;
  Region region = Region::US;
  Category category = Category::Other;
  std::map<MonthStamp, double> values;
  Provenance provenance;
};

// y_t = x_t - x_{t-1} (diff) or ln x_t - ln x_{t-1} (log_diff). The output is
// keyed by the later month of each pair.
RawSeries difference_transform(const RawSeries& s, Transform kind);

struct AdfResult {
  double statistic = 0.0;
  bool is_stationary = false;
  std::size_t lag = 0;
  double critical_value = -2.86;
};

// Large-sample critical values for the constant, no-trend regression.
double adf_critical_value(double alpha);

// Augmented Dickey-Fuller t-statistic on the lagged level in
//   dy_t = a + b*y_{t-1} + sum_i c_i*dy_{t-i} + e_t.
AdfResult adf_statistic(std::span<const double> values, std::size_t max_lag, double alpha = 0.05);
AdfResult adf_statistic(const RawSeries& s, std::size_t max_lag, double alpha = 0.05);

// floor(12 * (n/100)^(1/4))
std::size_t schwert_lag(std::size_t n);

StandardizedSeries zscore(const RawSeries& s, ZScoreMode mode);

// Bartlett-weighted long-run variance with population autocovariances.
double newey_west_variance(std::span<const double> values, std::size_t lag);

// floor(4 * (n/100)^(2/9))
std::size_t newey_west_default_lag(std::size_t n);

template <typename T>
std::vector<T> subsample(std::span<const T> values, std::size_t stride) {
  std::vector<T> out;
  if (stride == 0) stride = 1;
  for (std::size_t i = 0; i < values.size(); i += stride) out.push_back(values[i]);
  return out;
}

template <typename T>
std::vector<T> subsample(const std::vector<T>& values, std::size_t stride) {
  return subsample(std::span<const T>(values), stride);
}

// sqrt of the Newey-West variance computed on the stride-thinned sample. Each
// panel column is divided by this before PCA.
double long_run_scale(std::span<const double> values, std::optional<std::size_t> lag,
                      std::size_t stride);

// Months x series matrix. Entries before a column's first observation are NaN
// and flagged unavailable; interior gaps are forward-filled.
struct Panel {
  std::vector<MonthStamp> months;
  std::vector<std::string> ids;
  std::vector<Category> categories;
  Eigen::MatrixXd values;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> available;
  std::vector<std::size_t> fill_counts;

  std::size_t rows() const noexcept { return months.size(); }
  std::size_t cols() const noexcept { return ids.size(); }
  std::optional<std::size_t> column_of(const std::string& id) const;

  // Columns whose category is one of `keep`, in original order.
  Panel select(std::span<const Category> keep) const;
  Panel select_columns(std::span<const std::size_t> columns) const;
  // Drops leading rows until every column is available. Throws EmptyOverlap if none remain.
  Panel trim_to_common_start() const;
  Panel head(std::size_t n_rows) const;
};

Panel align_panel(std::span<const StandardizedSeries> series, MonthRange range);

}  // namespace cyclecast
