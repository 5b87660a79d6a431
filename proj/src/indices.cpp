#include "cyclecast/indices.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "cyclecast/error.hpp"

namespace cyclecast {

namespace {

Eigen::VectorXd initial_vector(const Eigen::MatrixXd& cov) {
  const auto c = cov.cols();
  Eigen::VectorXd v = cov * Eigen::VectorXd::Ones(c);
  if (v.norm() > 1e-8 * cov.diagonal().sum()) return v.normalized();
  // Ones happens to be (nearly) orthogonal to the range; start from the
  // column with the largest variance instead.
  Eigen::Index j = 0;
  cov.diagonal().maxCoeff(&j);
  return cov.col(j).normalized();
}

}  // namespace

PcaResult pca_first_component(const Eigen::MatrixXd& panel, PowerIterationOptions opts) {
  const auto n = panel.rows();
  const auto c = panel.cols();
  if (n < 2 || c < 1) {
    throw Error(Errc::PanelTooShort, "PCA needs at least 2 rows and 1 column");
  }
  if (!panel.allFinite()) throw Error(Errc::DegenerateCovariance, "panel has non-finite entries");

  Eigen::RowVectorXd mean = panel.colwise().mean();
  Eigen::MatrixXd centered = panel.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const double trace = cov.trace();
  if (!(trace > 0.0)) throw Error(Errc::DegenerateCovariance, "all columns are constant");

  PcaResult res;
  Eigen::VectorXd v = initial_vector(cov);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    Eigen::VectorXd w = cov * v;
    double norm = w.norm();
    if (!(norm > 0.0)) break;
    w /= norm;
    double change = (w - v).norm();
    v = std::move(w);
    if (change < opts.tolerance) {
      ++it;
      break;
    }
  }
  for (Eigen::Index j = 0; j < c; ++j) {
    if (v(j) != 0.0) {
      if (v(j) < 0.0) v = -v;
      break;
    }
  }
  res.iterations = it;
  res.eigenvalue = v.dot(cov * v);
  res.explained_variance_ratio = std::clamp(res.eigenvalue / trace, 0.0, 1.0);
  res.scores = centered * v;
  res.loadings = std::move(v);
  return res;
}

PcaResult sign_normalize(PcaResult r, std::size_t reference_column) {
  if (reference_column >= static_cast<std::size_t>(r.loadings.size())) {
    throw Error(Errc::DimensionMismatch, "reference column out of range");
  }
  double ref = r.loadings(static_cast<Eigen::Index>(reference_column));
  if (ref == 0.0) throw Error(Errc::ZeroReferenceLoading, "column " + std::to_string(reference_column));
  if (ref < 0.0) {
    r.loadings = -r.loadings;
    r.scores = -r.scores;
  }
  return r;
}

ExpandingPcaOutput expanding_pca(const Eigen::MatrixXd& panel, const ExpandingPcaOptions& opts) {
  const auto total = static_cast<std::size_t>(panel.rows());
  const std::size_t min_window = std::max<std::size_t>(opts.min_window_months, 2);
  if (total < min_window) {
    throw Error(Errc::PanelTooShort, "panel has " + std::to_string(total) +
                                         " rows, expanding window needs " +
                                         std::to_string(min_window));
  }
  ExpandingPcaOutput out;
  out.first_row = min_window - 1;
  out.values.reserve(total - out.first_row);
  for (std::size_t t = out.first_row; t < total; ++t) {
    Eigen::MatrixXd window = panel.topRows(static_cast<Eigen::Index>(t + 1));
    if (opts.long_run_weighting) {
      for (Eigen::Index j = 0; j < window.cols(); ++j) {
        Eigen::VectorXd col = window.col(j);
        double scale = long_run_scale(std::span<const double>(col.data(), col.size()), opts.nw_lag,
                                      opts.subsample_stride);
        window.col(j) /= scale;
      }
    }
    auto fit = sign_normalize(pca_first_component(window), opts.reference_column);
    out.values.push_back(fit.scores(fit.scores.size() - 1));
    if (t + 1 == total) out.last_fit = std::move(fit);
  }
  return out;
}

std::string_view to_string(IndexKind k) noexcept {
  return k == IndexKind::Growth ? "growth" : "inflation";
}

std::optional<std::vector<double>> CompositeIndex::window_ending(MonthStamp month,
                                                                  std::size_t window) const {
  auto end = values.upper_bound(month);
  if (end == values.begin() || std::prev(end)->first != month) return std::nullopt;
  std::vector<double> out;
  auto it = end;
  MonthStamp expected = month;
  while (out.size() < window) {
    if (it == values.begin()) return std::nullopt;
    --it;
    if (it->first != expected) return std::nullopt;
    out.push_back(it->second);
    expected = expected.prev();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

CompositeIndex expanding_pca_index(const Panel& panel, IndexKind kind, Region region,
                                   const ExpandingPcaOptions& opts) {
  if (!panel.available.all()) {
    throw Error(Errc::EmptyOverlap, "index panel has unavailable entries; trim it first");
  }
  auto res = expanding_pca(panel.values, opts);
  CompositeIndex idx;
  idx.kind = kind;
  idx.region = region;
  idx.min_window_months = opts.min_window_months;
  idx.series_ids = panel.ids;
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    idx.values.emplace_hint(idx.values.end(), panel.months[res.first_row + i], res.values[i]);
  }
  idx.final_loadings = res.last_fit.loadings;
  idx.final_explained_variance_ratio = res.last_fit.explained_variance_ratio;
  return idx;
}

CompositeIndex expanding_pca_index(const Panel& panel, std::size_t min_window_months) {
  ExpandingPcaOptions opts;
  opts.min_window_months = min_window_months;
  return expanding_pca_index(panel, IndexKind::Growth, Region::US, opts);
}

void write_index_csv(std::ostream& out, const CompositeIndex& index) {
  RawSeries s;
  s.observations = index.values;
  write_series_csv(out, s);
}

CompositeIndex read_index_csv(std::istream& in, IndexKind kind, Region region) {
  CompositeIndex idx;
  idx.kind = kind;
  idx.region = region;
  idx.values = read_series_observations(in);
  return idx;
}

std::string loadings_json(const CompositeIndex& growth, const CompositeIndex& inflation) {
  nlohmann::ordered_json doc;
  for (const auto* idx : {&growth, &inflation}) {
    nlohmann::ordered_json entry;
    entry["region"] = std::string(to_string(idx->region));
    entry["min_window_months"] = idx->min_window_months;
    entry["explained_variance_ratio"] = idx->final_explained_variance_ratio;
    nlohmann::ordered_json loadings = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < idx->series_ids.size(); ++j) {
      loadings[idx->series_ids[j]] = idx->final_loadings(static_cast<Eigen::Index>(j));
    }
    entry["loadings"] = std::move(loadings);
    entry["first_month"] = idx->values.empty() ? "" : idx->values.begin()->first.to_string();
    doc[std::string(to_string(idx->kind))] = std::move(entry);
  }
  return doc.dump(2) + "\n";
}

}  // namespace cyclecast
