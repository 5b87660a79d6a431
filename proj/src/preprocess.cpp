#include "cyclecast/preprocess.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cyclecast/error.hpp"

namespace cyclecast {

RawSeries difference_transform(const RawSeries& s, Transform kind) {
  if (s.observations.size() < 2) {
    throw Error(Errc::TooShort, s.id + ": need at least 2 observations to difference");
  }
  if (kind == Transform::LogDiff) {
    for (const auto& [m, v] : s.observations) {
      if (!(v > 0.0)) {
        throw Error(Errc::NonPositiveForLog, s.id + " at " + m.to_string());
      }
    }
  }
  RawSeries out = s;
  out.observations.clear();
  out.transform_applied = kind;
  if (kind == Transform::None) {
    out.observations = s.observations;
    return out;
  }
  auto prev = s.observations.begin();
  for (auto it = std::next(prev); it != s.observations.end(); ++it, ++prev) {
    double y = kind == Transform::Diff ? it->second - prev->second
                                       : std::log(it->second) - std::log(prev->second);
    out.observations.emplace_hint(out.observations.end(), it->first, y);
  }
  return out;
}

double adf_critical_value(double alpha) {
  if (alpha <= 0.01) return -3.43;
  if (alpha <= 0.05) return -2.86;
  return -2.57;
}

std::size_t schwert_lag(std::size_t n) {
  return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

AdfResult adf_statistic(std::span<const double> y, std::size_t max_lag, double alpha) {
  const std::size_t n = y.size();
  if (n < max_lag + 10) {
    throw Error(Errc::TooShort, "ADF needs at least max_lag + 10 = " +
                                    std::to_string(max_lag + 10) + " points, got " +
                                    std::to_string(n));
  }
  const std::size_t p = max_lag;
  const std::size_t rows = n - 1 - p;
  const std::size_t k = 2 + p;
  Eigen::MatrixXd x(rows, k);
  Eigen::VectorXd target(rows);
  auto dy = [&](std::size_t t) { return y[t] - y[t - 1]; };
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t t = r + p + 1;
    target(r) = dy(t);
    x(r, 0) = 1.0;
    x(r, 1) = y[t - 1];
    for (std::size_t i = 1; i <= p; ++i) x(r, 1 + i) = dy(t - i);
  }
  Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw Error(Errc::DegenerateInput, "ADF regression is singular");
  }
  Eigen::VectorXd beta = ldlt.solve(x.transpose() * target);
  Eigen::VectorXd resid = target - x * beta;
  double s2 = resid.squaredNorm() / static_cast<double>(rows - k);
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                             static_cast<Eigen::Index>(k)));
  double se = std::sqrt(s2 * cov(1, 1));

  AdfResult res;
  res.lag = p;
  res.critical_value = adf_critical_value(alpha);
  res.statistic = se > 0.0 ? beta(1) / se : -std::numeric_limits<double>::infinity();
  res.is_stationary = res.statistic < res.critical_value;
  return res;
}

AdfResult adf_statistic(const RawSeries& s, std::size_t max_lag, double alpha) {
  auto v = s.values();
  return adf_statistic(std::span<const double>(v), max_lag, alpha);
}

StandardizedSeries zscore(const RawSeries& s, ZScoreMode mode) {
  const std::size_t n = s.observations.size();
  if (n < 2) throw Error(Errc::TooShort, s.id + ": need at least 2 observations for a z-score");
  StandardizedSeries out;
  out.id = s.id;
  out.region = s.region;
  out.category = s.category;
  out.provenance.transform = s.transform_applied;
  out.provenance.zscore_mode = mode;

  if (mode.kind == ZScoreKind::Full) {
    double mean = 0.0;
    for (const auto& [m, v] : s.observations) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& [m, v] : s.observations) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) throw Error(Errc::ZeroVariance, s.id);
    for (const auto& [m, v] : s.observations) {
      out.values.emplace_hint(out.values.end(), m, (v - mean) / sd);
    }
    return out;
  }

  const std::size_t min_window = std::max<std::size_t>(mode.min_window, 2);
  if (n < min_window) {
    throw Error(Errc::TooShort, s.id + ": fewer observations than the expanding minimum window");
  }
  // Welford running moments over observations seen so far.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  for (const auto& [m, v] : s.observations) {
    ++count;
    double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
    if (count < min_window) continue;
    double sd = std::sqrt(m2 / static_cast<double>(count));
    if (!(sd > 0.0)) throw Error(Errc::ZeroVariance, s.id + " up to " + m.to_string());
    out.values.emplace_hint(out.values.end(), m, (v - mean) / sd);
  }
  return out;
}

double newey_west_variance(std::span<const double> values, std::size_t lag) {
  const std::size_t n = values.size();
  if (n <= lag || n == 0) {
    throw Error(Errc::TooShort, "Newey-West needs more than lag = " + std::to_string(lag) + " points");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t t = k; t < n; ++t) acc += (values[t] - mean) * (values[t - k] - mean);
    return acc / static_cast<double>(n);
  };
  double sigma2 = autocov(0);
  for (std::size_t k = 1; k <= lag; ++k) {
    double w = 1.0 - static_cast<double>(k) / static_cast<double>(lag + 1);
    sigma2 += 2.0 * w * autocov(k);
  }
  return sigma2;
}

std::size_t newey_west_default_lag(std::size_t n) {
  return static_cast<std::size_t>(
      std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

double long_run_scale(std::span<const double> values, std::optional<std::size_t> lag,
                      std::size_t stride) {
  auto thinned = subsample(values, stride);
  if (thinned.size() < 2) return 1.0;
  std::size_t l = lag.value_or(newey_west_default_lag(thinned.size()));
  l = std::min(l, thinned.size() - 1);
  double v = newey_west_variance(thinned, l);
  return v > 0.0 ? std::sqrt(v) : 1.0;
}

std::optional<std::size_t> Panel::column_of(const std::string& id) const {
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (ids[j] == id) return j;
  }
  return std::nullopt;
}

Panel Panel::select_columns(std::span<const std::size_t> columns) const {
  Panel out;
  out.months = months;
  const auto r = static_cast<Eigen::Index>(rows());
  const auto c = static_cast<Eigen::Index>(columns.size());
  out.values.resize(r, c);
  out.available.resize(r, c);
  for (Eigen::Index k = 0; k < c; ++k) {
    auto j = columns[static_cast<std::size_t>(k)];
    out.ids.push_back(ids[j]);
    out.categories.push_back(categories[j]);
    out.fill_counts.push_back(fill_counts[j]);
    out.values.col(k) = values.col(static_cast<Eigen::Index>(j));
    out.available.col(k) = available.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

Panel Panel::select(std::span<const Category> keep) const {
  std::vector<std::size_t> cols_kept;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    for (auto c : keep) {
      if (categories[j] == c) {
        cols_kept.push_back(j);
        break;
      }
    }
  }
  return select_columns(cols_kept);
}

Panel Panel::trim_to_common_start() const {
  std::size_t start = 0;
  while (start < rows() && !available.row(static_cast<Eigen::Index>(start)).all()) ++start;
  if (start == rows()) throw Error(Errc::EmptyOverlap, "no month where every series is available");
  Panel out = *this;
  const auto n = static_cast<Eigen::Index>(rows() - start);
  out.months.assign(months.begin() + static_cast<std::ptrdiff_t>(start), months.end());
  out.values = values.bottomRows(n);
  out.available = available.bottomRows(n);
  return out;
}

Panel Panel::head(std::size_t n_rows) const {
  Panel out = *this;
  n_rows = std::min(n_rows, rows());
  out.months.resize(n_rows);
  out.values = values.topRows(static_cast<Eigen::Index>(n_rows));
  out.available = available.topRows(static_cast<Eigen::Index>(n_rows));
  return out;
}

Panel align_panel(std::span<const StandardizedSeries> series, MonthRange range) {
  Panel panel;
  const int n_rows = range.size();
  for (int i = 0; i < n_rows; ++i) panel.months.push_back(range.first.plus(i));
  const auto r = static_cast<Eigen::Index>(n_rows);
  const auto c = static_cast<Eigen::Index>(series.size());
  panel.values = Eigen::MatrixXd::Constant(r, c, std::numeric_limits<double>::quiet_NaN());
  panel.available = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(r, c, false);

  for (Eigen::Index j = 0; j < c; ++j) {
    const auto& s = series[static_cast<std::size_t>(j)];
    panel.ids.push_back(s.id);
    panel.categories.push_back(s.category);
    auto first_in = s.values.lower_bound(range.first);
    if (first_in == s.values.end() || first_in->first > range.last) {
      throw Error(Errc::EmptyOverlap, s.id + " has no observation in " +
                                          range.first.to_string() + ".." + range.last.to_string());
    }
    std::size_t fills = 0;
    std::optional<double> last;
    auto it = s.values.begin();
    for (Eigen::Index i = 0; i < r; ++i) {
      MonthStamp m = panel.months[static_cast<std::size_t>(i)];
      bool exact = false;
      while (it != s.values.end() && it->first <= m) {
        exact = it->first == m;
        last = it->second;
        ++it;
      }
      if (!last) continue;
      if (!exact) ++fills;
      panel.values(i, j) = *last;
      panel.available(i, j) = true;
    }
    panel.fill_counts.push_back(fills);
  }
  return panel;
}

}  // namespace cyclecast
