#include "epf/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "epf/error.hpp"
#include "epf/rng.hpp"

namespace epf {

TimeSeries generate_synthetic(const SyntheticSpec& spec) {
  if (spec.length == 0) throw ConfigError("synthetic.length: must be >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Rng rng(spec.seed);

  TimeSeries s;
  s.start = parse_timestamp("2019-01-01T00:00");
  s.values.resize(spec.length);
  double ar = 0.0;
  for (std::size_t i = 0; i < spec.length; ++i) {
    const double t = static_cast<double>(i);
    ar = spec.ar_coefficient * ar + spec.ar_sigma * rng.normal();
    // Evening peak shape: fundamental plus a second harmonic.
    const double daily = std::sin(two_pi * (t - 6.0) / 24.0) + 0.35 * std::sin(2.0 * two_pi * t / 24.0);
    const double weekly = std::sin(two_pi * t / 168.0);
    s.values[i] = spec.level + spec.trend_per_hour * t + spec.daily_amplitude * daily +
                  spec.weekly_amplitude * weekly + ar + spec.noise_sigma * rng.normal();
  }
  return s;
}

}  // namespace epf
