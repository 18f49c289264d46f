#pragma once

#include <cstddef>
#include <cstdint>

#include "epf/timeseries.hpp"

namespace epf {

/// Hourly price-like series: level + linear trend + daily and weekly cycles
/// + a persistent AR(1) component + white measurement noise.
struct SyntheticSpec {
  std::size_t length = 2048;
  std::uint64_t seed = 7;
  double level = 50.0;
  double trend_per_hour = 0.002;
  double daily_amplitude = 6.0;
  double weekly_amplitude = 2.5;
  double ar_coefficient = 0.995;
  double ar_sigma = 2.0;
  double noise_sigma = 0.8;
};

TimeSeries generate_synthetic(const SyntheticSpec& spec);

}  // namespace epf
