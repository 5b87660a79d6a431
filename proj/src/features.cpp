#include "cyclecast/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cyclecast/error.hpp"

namespace cyclecast {

double ols_slope(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 2) throw Error(Errc::TooShort, "slope needs at least 2 values");
  const double x_mean = static_cast<double>(n - 1) / 2.0;
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (y[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::optional<std::size_t> FeatureMatrix::row_of(MonthStamp m) const {
  auto it = std::lower_bound(months.begin(), months.end(), m);
  if (it == months.end() || *it != m) return std::nullopt;
  return static_cast<std::size_t>(it - months.begin());
}

FeatureMatrix build_feature_matrix(const Panel& panel, const FeatureOptions& opts) {
  if (opts.window < 2) throw Error(Errc::TooShort, "window must be at least 2");
  if (panel.rows() < opts.window) {
    throw Error(Errc::PanelTooShort, "panel has " + std::to_string(panel.rows()) +
                                         " rows, window is " + std::to_string(opts.window));
  }
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < panel.cols(); ++j) {
    if (std::find(opts.exclude.begin(), opts.exclude.end(), panel.categories[j]) ==
        opts.exclude.end()) {
      cols.push_back(j);
    }
  }
  if (cols.empty()) throw Error(Errc::EmptyAfterFilter, "no series left after category filter");

  FeatureMatrix fm;
  fm.window = opts.window;
  for (auto j : cols) fm.feature_names.push_back(panel.ids[j]);

  std::vector<std::vector<double>> rows;
  std::vector<double> buf(opts.window);
  for (std::size_t t = opts.window - 1; t < panel.rows(); ++t) {
    const auto top = static_cast<Eigen::Index>(t + 1 - opts.window);
    const auto w = static_cast<Eigen::Index>(opts.window);
    bool complete = true;
    for (auto j : cols) {
      if (!panel.available.block(top, static_cast<Eigen::Index>(j), w, 1).all()) {
        complete = false;
        break;
      }
    }
    if (!complete) continue;
    std::vector<double> row;
    row.reserve(cols.size());
    for (auto j : cols) {
      for (std::size_t k = 0; k < opts.window; ++k) {
        buf[k] = panel.values(top + static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      }
      double slope = ols_slope(buf);
      if (opts.trend_sign_only) slope = static_cast<double>((slope > 0.0) - (slope < 0.0));
      row.push_back(slope);
    }
    fm.months.push_back(panel.months[t]);
    rows.push_back(std::move(row));
  }
  fm.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return fm;
}

ForecastPairs ForecastPairs::subset(std::span<const std::size_t> rows) const {
  ForecastPairs out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = rows[i];
    out.feature_months.push_back(feature_months[r]);
    out.target_months.push_back(target_months[r]);
    out.y.push_back(y[r]);
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

ForecastPairs forecast_alignment(const FeatureMatrix& features, const LabeledDataset& labels) {
  std::vector<std::size_t> kept;
  ForecastPairs out;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto target = features.months[i].next();
    if (auto label = labels.label_at(target)) {
      kept.push_back(i);
      out.feature_months.push_back(features.months[i]);
      out.target_months.push_back(target);
      out.y.push_back(*label);
    }
  }
  if (kept.empty()) throw Error(Errc::EmptyOverlap, "no feature month has a next-month label");
  out.x.resize(static_cast<Eigen::Index>(kept.size()), features.values.cols());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = features.values.row(static_cast<Eigen::Index>(kept[i]));
  }
  return out;
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& x) {
  FeatureScaler s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
    double sd = std::sqrt(var);
    s.scale(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd FeatureScaler::transform(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw Error(Errc::DimensionMismatch, "scaler width");
  Eigen::MatrixXd out = x.rowwise() - mean.transpose();
  return out.array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd FeatureScaler::transform_row(std::span<const double> row) const {
  if (static_cast<Eigen::Index>(row.size()) != mean.size()) {
    throw Error(Errc::DimensionMismatch, "scaler width");
  }
  Eigen::VectorXd out(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    out(j) = (row[static_cast<std::size_t>(j)] - mean(j)) / scale(j);
  }
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& fm) {
  out << "year,month";
  for (const auto& name : fm.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    out << fm.months[i].year() << ',' << fm.months[i].month();
    for (std::size_t j = 0; j < fm.cols(); ++j) {
      out << ',' << format_double(fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

}  // namespace cyclecast
