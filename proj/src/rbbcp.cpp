#include "cyclecast/rbbcp.hpp"

#include "cyclecast/error.hpp"
#include "cyclecast/features.hpp"

namespace cyclecast {

TrendDirection direction_of_slope(double slope, ZeroSlopeRule rule) noexcept {
  if (slope > 0.0) return TrendDirection::Up;
  if (slope < 0.0) return TrendDirection::Down;
  return rule == ZeroSlopeRule::Up ? TrendDirection::Up : TrendDirection::Down;
}

TrendDirection trend_direction(std::span<const double> window_values, ZeroSlopeRule rule) {
  return direction_of_slope(ols_slope(window_values), rule);
}

TrendDirection trend_direction(const CompositeIndex& index, MonthStamp month, std::size_t window,
                               ZeroSlopeRule rule) {
  if (window < 2) throw Error(Errc::TooShort, "trend window must be at least 2");
  auto values = index.window_ending(month, window);
  if (!values) {
    throw Error(Errc::InsufficientHistory, std::string(to_string(index.kind)) + " index lacks " +
                                               std::to_string(window) + " months ending " +
                                               month.to_string());
  }
  return trend_direction(*values, rule);
}

PhaseDistribution rbbcp_predict_proba(TrendDirection inflation, TrendDirection growth) {
  std::array<double, kNumPhases> p{};
  p[phase_index(rbbcp_predict(inflation, growth))] = 1.0;
  return PhaseDistribution(p);
}

PhaseDistribution rbbcp_forecast(const CompositeIndex& inflation, const CompositeIndex& growth,
                                 MonthStamp month, const RbbcpConfig& cfg) {
  return rbbcp_predict_proba(trend_direction(inflation, month, cfg.window, cfg.zero_slope),
                             trend_direction(growth, month, cfg.window, cfg.zero_slope));
}

}  // namespace cyclecast
