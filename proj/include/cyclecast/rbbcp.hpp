#pragma once

#include <cstddef>
#include <span>

#include "cyclecast/dataset.hpp"
#include "cyclecast/indices.hpp"
#include "cyclecast/distribution.hpp"

namespace cyclecast {

enum class TrendDirection { Up, Down };

// How an exactly flat trend is read. Down by default, so a flat economy is
// never called expansionary.
enum class ZeroSlopeRule { Down, Up };

TrendDirection direction_of_slope(double slope, ZeroSlopeRule rule = ZeroSlopeRule::Down) noexcept;

TrendDirection trend_direction(std::span<const double> window_values,
                               ZeroSlopeRule rule = ZeroSlopeRule::Down);

// Direction of the OLS slope over the `window` index values ending at `month`.
// Throws InsufficientHistory.
TrendDirection trend_direction(const CompositeIndex& index, MonthStamp month, std::size_t window,
                               ZeroSlopeRule rule = ZeroSlopeRule::Down);

//  inflation  growth   phase
//  Down       Down     Recession
//  Down       Up       Recovery
//  Up         Down     Slowdown
//  Up         Up       Expansion
constexpr PhaseLabel rbbcp_predict(TrendDirection inflation, TrendDirection growth) noexcept {
  if (inflation == TrendDirection::Down) {
    return growth == TrendDirection::Down ? PhaseLabel::Recession : PhaseLabel::Recovery;
  }
  return growth == TrendDirection::Down ? PhaseLabel::Slowdown : PhaseLabel::Expansion;
}

PhaseDistribution rbbcp_predict_proba(TrendDirection inflation, TrendDirection growth);

struct RbbcpConfig {
  std::size_t window = 12;
  ZeroSlopeRule zero_slope = ZeroSlopeRule::Down;
};

// Phase distribution for month+1 given index history through `month`.
PhaseDistribution rbbcp_forecast(const CompositeIndex& inflation, const CompositeIndex& growth,
                                 MonthStamp month, const RbbcpConfig& cfg);

}  // namespace cyclecast
