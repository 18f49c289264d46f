#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace epf {

using Timestamp = std::chrono::sys_seconds;

/// Uniformly sampled series. `exogenous` is either empty or has the same
/// length as `values` (an optional second channel such as load).
struct TimeSeries {
  std::vector<double> values;
  std::optional<Timestamp> start;
  std::chrono::seconds step{3600};
  std::vector<double> exogenous;

  std::size_t size() const { return values.size(); }
  bool has_exogenous() const { return !exogenous.empty(); }

  /// Timestamp of sample i, if the series is anchored.
  std::optional<Timestamp> time_at(std::size_t i) const;
};

/// Throws DataError when a series is empty, contains non-finite values, or
/// has a mismatched exogenous channel.
void validate(const TimeSeries& series);

/// Parses "YYYY-MM-DDTHH:MM[:SS]" (a space is accepted in place of 'T').
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

/// Reads a CSV of `price`, `timestamp,price` or `timestamp,price,exogenous`
/// rows. A non-numeric first row is treated as a header. Timestamps, when
/// present, must be strictly uniform; any gap is rejected.
TimeSeries load_series(const std::filesystem::path& path);
TimeSeries parse_series(std::string_view text);

void write_series(const std::filesystem::path& path, const TimeSeries& series);

/// Chronological prefix of n_train samples followed by the next n_test.
std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, std::size_t n_train, std::size_t n_test);

/// Min-max map onto [0, 1].
class Scaler {
 public:
  Scaler() : Scaler(0.0, 1.0) {}
  Scaler(double min, double max);

  double min() const { return min_; }
  double max() const { return max_; }

  double transform(double x) const { return (x - min_) / (max_ - min_); }
  double inverse(double y) const { return min_ + y * (max_ - min_); }

  std::vector<double> transform(std::span<const double> xs) const;
  std::vector<double> inverse(std::span<const double> ys) const;

  static Scaler fit(std::span<const double> xs);

 private:
  double min_;
  double max_;
};

/// Fits a Scaler on `series` and returns the scaled copy. The exogenous
/// channel, if any, is left untouched.
std::pair<TimeSeries, Scaler> fit_scale(const TimeSeries& series);

/// Sliding-window pairs: inputs[i] = values[i, i+L), targets[i] = values[i+L+h-1].
struct WindowedDataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;
  std::size_t window = 0;
  std::size_t horizon = 0;

  std::size_t size() const { return targets.size(); }
};

/// Requires N >= L + h; yields N - L - h + 1 pairs. When the series carries
/// an exogenous channel, each input is the price window followed by the
/// exogenous window over the same indices (length 2L).
WindowedDataset make_windows(const TimeSeries& series, std::size_t window, std::size_t horizon);

}  // namespace epf
