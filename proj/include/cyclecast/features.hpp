#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cyclecast/dataset.hpp"
#include "cyclecast/preprocess.hpp"

namespace cyclecast {

// Least-squares slope of values against abscissae 0..n-1.
double ols_slope(std::span<const double> values);

struct FeatureMatrix {
  std::vector<MonthStamp> months;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;  // months x features
  std::size_t window = 0;

  std::size_t rows() const noexcept { return months.size(); }
  std::size_t cols() const noexcept { return feature_names.size(); }
  std::optional<std::size_t> row_of(MonthStamp m) const;
};

struct FeatureOptions {
  std::size_t window = 12;
  // Commodity and stock-index series carry little cycle signal and are left out.
  std::vector<Category> exclude = {Category::Commodity, Category::StockIndex};
  // Replace each slope by its sign (+1 / -1, 0 stays 0).
  bool trend_sign_only = false;
};

// Row for month t holds the slope of each included column over months
// t-window+1..t. Months lacking full availability in any included column are dropped.
FeatureMatrix build_feature_matrix(const Panel& panel, const FeatureOptions& opts);

// (features at t, label at t+1)
struct ForecastPairs {
  std::vector<MonthStamp> feature_months;
  std::vector<MonthStamp> target_months;
  Eigen::MatrixXd x;
  std::vector<PhaseLabel> y;

  std::size_t size() const noexcept { return y.size(); }
  ForecastPairs subset(std::span<const std::size_t> rows) const;
};

ForecastPairs forecast_alignment(const FeatureMatrix& features, const LabeledDataset& labels);

// Column-wise z-scoring with statistics frozen at fit time.
struct FeatureScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static FeatureScaler fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd transform_row(std::span<const double> row) const;
};

// `year,month,<id>...`
void write_feature_csv(std::ostream& out, const FeatureMatrix& fm);

}  // namespace cyclecast
