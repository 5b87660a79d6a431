#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cyclecast/features.hpp"
#include "cyclecast/random.hpp"
#include "test_support.hpp"

using namespace cyclecast;
using testing::error_code_of;
using testing::make_span;

namespace {

Panel make_panel(const Eigen::MatrixXd& values, std::vector<Category> cats, MonthStamp start = MonthStamp(2000, 1)) {
  Panel p;
  p.values = values;
  p.available.setConstant(values.rows(), values.cols(), true);
  for (Eigen::Index r = 0; r < values.rows(); ++r) p.months.push_back(start.plus(static_cast<int>(r)));
  for (Eigen::Index c = 0; c < values.cols(); ++c) p.ids.push_back("s" + std::to_string(c));
  p.categories = std::move(cats);
  p.fill_counts.assign(static_cast<std::size_t>(values.cols()), 0);
  return p;
}

Eigen::MatrixXd noise(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("ols_slope examples") {
  CHECK(ols_slope(std::vector<double>{2, 4, 6, 8}) == doctest::Approx(2.0));
  CHECK(ols_slope(std::vector<double>{5, 5, 5, 5, 5}) == 0.0);
  CHECK(ols_slope(std::vector<double>{1, 2, 2, 3}) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(error_code_of([] { ols_slope(std::vector<double>{1}); }) == Errc::TooShort);
}

TEST_CASE("ols_slope is affine-equivariant and odd under reversal") {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> y(2 + trial % 30);
    for (auto& v : y) v = rng.normal();
    const double a = rng.uniform(-5, 5), b = rng.uniform(-100, 100);
    std::vector<double> t(y.size()), rev(y.rbegin(), y.rend());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = a * y[i] + b;
    const double s = ols_slope(y);
    CHECK(ols_slope(t) == doctest::Approx(a * s).epsilon(1e-9).scale(1.0));
    CHECK(ols_slope(rev) == doctest::Approx(-s).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("12-row panel with window 12 yields one row") {
  Rng rng(1);
  auto p = make_panel(noise(rng, 12, 2), {Category::Growth, Category::Inflation});
  FeatureOptions opts;
  opts.window = 12;
  auto fm = build_feature_matrix(p, opts);
  REQUIRE(fm.rows() == 1);
  CHECK(fm.months[0] == MonthStamp(2000, 12));
  std::vector<double> col(p.values.col(1).data(), p.values.col(1).data() + 12);
  CHECK(fm.values(0, 1) == doctest::Approx(ols_slope(col)));
  opts.window = 13;
  CHECK(error_code_of([&] { build_feature_matrix(p, opts); }) == Errc::PanelTooShort);
  opts.window = 1;
  CHECK(error_code_of([&] { build_feature_matrix(p, opts); }) == Errc::TooShort);
}

TEST_CASE("commodity and stock-index series are excluded by default") {
  Rng rng(2);
  auto only = make_panel(noise(rng, 20, 2), {Category::Commodity, Category::StockIndex});
  CHECK(error_code_of([&] { build_feature_matrix(only, {}); }) == Errc::EmptyAfterFilter);

  auto mixed = make_panel(noise(rng, 20, 3), {Category::Growth, Category::Commodity, Category::Rates});
  auto fm = build_feature_matrix(mixed, {});
  CHECK(fm.feature_names == std::vector<std::string>{"s0", "s2"});
  FeatureOptions keep_all;
  keep_all.exclude.clear();
  CHECK(build_feature_matrix(mixed, keep_all).cols() == 3);
}

TEST_CASE("rows lacking full window coverage are dropped") {
  Rng rng(3);
  auto p = make_panel(noise(rng, 30, 2), {Category::Growth, Category::Growth});
  for (int r = 0; r < 5; ++r) {
    p.available(r, 1) = false;
    p.values(r, 1) = std::nan("");
  }
  FeatureOptions opts;
  opts.window = 6;
  auto fm = build_feature_matrix(p, opts);
  CHECK(fm.months.front() == MonthStamp(2000, 1).plus(10));
  CHECK(fm.rows() == 20);
  CHECK(fm.values.allFinite());
}

TEST_CASE("features are causal") {
  Rng rng(4);
  auto p = make_panel(noise(rng, 60, 3), {Category::Growth, Category::Inflation, Category::Growth});
  FeatureOptions opts;
  opts.window = 9;
  auto full = build_feature_matrix(p, opts);
  for (std::size_t cut : {9u, 20u, 59u}) {
    auto part = build_feature_matrix(p.head(cut), opts);
    for (std::size_t r = 0; r < part.rows(); ++r) {
      auto fr = full.row_of(part.months[r]);
      REQUIRE(fr);
      CHECK((part.values.row(static_cast<Eigen::Index>(r)) - full.values.row(static_cast<Eigen::Index>(*fr)))
                .norm() == 0.0);
    }
  }
}

TEST_CASE("sign-only mode") {
  Eigen::MatrixXd v(4, 3);
  v << 1, 4, 2, 2, 3, 2, 3, 2, 2, 4, 1, 2;
  auto p = make_panel(v, {Category::Growth, Category::Growth, Category::Growth});
  FeatureOptions opts;
  opts.window = 4;
  opts.trend_sign_only = true;
  auto fm = build_feature_matrix(p, opts);
  CHECK(fm.values(0, 0) == 1.0);
  CHECK(fm.values(0, 1) == -1.0);
  CHECK(fm.values(0, 2) == 0.0);
}

TEST_CASE("forecast alignment shifts labels by one month") {
  FeatureMatrix fm;
  fm.months = {MonthStamp(2010, 1), MonthStamp(2010, 2), MonthStamp(2010, 3)};
  fm.feature_names = {"a"};
  fm.values = Eigen::MatrixXd(3, 1);
  fm.values << 10, 20, 30;
  auto labels = testing::make_dataset(MonthStamp(2010, 1), {1, 2, 3, 4});
  auto pairs = forecast_alignment(fm, labels);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs.feature_months[0] == MonthStamp(2010, 1));
  CHECK(pairs.target_months[0] == MonthStamp(2010, 2));
  CHECK(pairs.x(0, 0) == 10.0);
  CHECK(pairs.y[0] == PhaseLabel::Expansion);
  CHECK(pairs.y[2] == PhaseLabel::Recession);

  auto same_end = testing::make_dataset(MonthStamp(2010, 1), {1, 2, 3});
  CHECK(forecast_alignment(fm, same_end).size() == 2);

  auto disjoint = testing::make_dataset(MonthStamp(1990, 1), {1, 2, 3});
  CHECK(error_code_of([&] { forecast_alignment(fm, disjoint); }) == Errc::EmptyOverlap);
}

TEST_CASE("feature scaler uses training statistics only") {
  Eigen::MatrixXd train(4, 2);
  train << 1, 5, 2, 5, 3, 5, 4, 5;
  auto sc = FeatureScaler::fit(train);
  CHECK(sc.mean(0) == 2.5);
  CHECK(sc.scale(0) == doctest::Approx(std::sqrt(1.25)));
  CHECK(sc.scale(1) == 1.0);  // constant column left unscaled
  Eigen::MatrixXd test(1, 2);
  test << 2.5, 7;
  auto t = sc.transform(test);
  CHECK(t(0, 0) == 0.0);
  CHECK(t(0, 1) == 2.0);
  std::vector<double> row = {2.5, 7};
  CHECK(sc.transform_row(row)(1) == 2.0);
}

TEST_CASE("feature CSV layout") {
  FeatureMatrix fm;
  fm.months = {MonthStamp(2010, 1)};
  fm.feature_names = {"a", "b"};
  fm.values = Eigen::MatrixXd(1, 2);
  fm.values << 0.5, -2;
  std::ostringstream os;
  write_feature_csv(os, fm);
  CHECK(os.str() == "year,month,a,b\n2010,1,0.5,-2\n");
}
