#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cyclecast/rbbcp.hpp"
#include "test_support.hpp"

using namespace cyclecast;
using testing::error_code_of;

namespace {

constexpr TrendDirection Up = TrendDirection::Up;
constexpr TrendDirection Down = TrendDirection::Down;

CompositeIndex index_of(const std::vector<double>& v, MonthStamp start = MonthStamp(2000, 1)) {
  CompositeIndex idx;
  for (std::size_t i = 0; i < v.size(); ++i) idx.values[start.plus(static_cast<int>(i))] = v[i];
  return idx;
}

}  // namespace

TEST_CASE("truth table") {
  CHECK(rbbcp_predict(Down, Down) == PhaseLabel::Recession);
  CHECK(rbbcp_predict(Down, Up) == PhaseLabel::Recovery);
  CHECK(rbbcp_predict(Up, Down) == PhaseLabel::Slowdown);
  CHECK(rbbcp_predict(Up, Up) == PhaseLabel::Expansion);
  static_assert(rbbcp_predict(Up, Up) == PhaseLabel::Expansion);
}

TEST_CASE("one-hot distribution agrees with the rule") {
  auto d = rbbcp_predict_proba(Up, Down);
  CHECK(d.probabilities() == std::array<double, 4>{0, 0, 1, 0});
  for (auto i : {Up, Down}) {
    for (auto g : {Up, Down}) {
      auto p = rbbcp_predict_proba(i, g);
      double sum = 0;
      for (double v : p.probabilities()) sum += v;
      CHECK(sum == 1.0);
      CHECK(p.argmax() == rbbcp_predict(i, g));
    }
  }
}

TEST_CASE("trend direction with the zero-slope rule") {
  CHECK(trend_direction(std::vector<double>{1, 2, 3}) == Up);
  CHECK(trend_direction(std::vector<double>{3, 2, 1}) == Down);
  CHECK(trend_direction(std::vector<double>{4, 4, 4}) == Down);
  CHECK(trend_direction(std::vector<double>{4, 4, 4}, ZeroSlopeRule::Up) == Up);
  CHECK(direction_of_slope(0.0) == Down);
  CHECK(direction_of_slope(1e-300) == Up);
}

TEST_CASE("trend direction over an index window") {
  auto idx = index_of({5, 1, 2, 3, 2});
  CHECK(trend_direction(idx, MonthStamp(2000, 4), 3) == Up);
  CHECK(trend_direction(idx, MonthStamp(2000, 5), 2) == Down);
  CHECK(error_code_of([&] { trend_direction(idx, MonthStamp(2000, 2), 3); }) == Errc::InsufficientHistory);
  CHECK(error_code_of([&] { trend_direction(idx, MonthStamp(2001, 1), 3); }) == Errc::InsufficientHistory);
}

TEST_CASE("rbbcp_forecast reads both indices at the feature month") {
  auto infl = index_of({3, 2, 1, 2, 3});
  auto growth = index_of({1, 2, 3, 2, 1});
  RbbcpConfig cfg;
  cfg.window = 3;
  CHECK(rbbcp_forecast(infl, growth, MonthStamp(2000, 3), cfg).argmax() == PhaseLabel::Recovery);
  CHECK(rbbcp_forecast(infl, growth, MonthStamp(2000, 5), cfg).argmax() == PhaseLabel::Slowdown);
  CHECK(error_code_of([&] { rbbcp_forecast(infl, growth, MonthStamp(2000, 2), cfg); }) ==
        Errc::InsufficientHistory);
}
