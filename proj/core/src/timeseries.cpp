#include "epf/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epf/error.hpp"

namespace epf {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::optional<Timestamp> TimeSeries::time_at(std::size_t i) const {
  if (!start) return std::nullopt;
  return *start + step * static_cast<std::int64_t>(i);
}

void validate(const TimeSeries& series) {
  if (series.values.empty()) throw DataError("empty series");
  if (series.step.count() <= 0) throw DataError("series step must be positive");
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (!std::isfinite(series.values[i])) throw DataError("non-finite value at index " + std::to_string(i));
  }
  if (series.has_exogenous()) {
    if (series.exogenous.size() != series.values.size()) throw DataError("exogenous channel length mismatch");
    for (std::size_t i = 0; i < series.exogenous.size(); ++i) {
      if (!std::isfinite(series.exogenous[i])) {
        throw DataError("non-finite exogenous value at index " + std::to_string(i));
      }
    }
  }
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  // YYYY-MM-DD[T ]HH:MM[:SS]
  if (text.size() != 16 && text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') return std::nullopt;
  if (text.size() == 19 && text[16] != ':') return std::nullopt;
  const auto y = parse_int(text.substr(0, 4));
  const auto mo = parse_int(text.substr(5, 2));
  const auto d = parse_int(text.substr(8, 2));
  const auto hh = parse_int(text.substr(11, 2));
  const auto mm = parse_int(text.substr(14, 2));
  const auto ss = text.size() == 19 ? parse_int(text.substr(17, 2)) : std::optional<int>{0};
  if (!y || !mo || !d || !hh || !mm || !ss) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *hh > 23 || *mm > 59 || *ss > 59) return std::nullopt;
  return sys_days{ymd} + hours{*hh} + minutes{*mm} + seconds{*ss};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

TimeSeries parse_series(std::string_view text) {
  TimeSeries series;
  std::vector<Timestamp> stamps;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  bool first_row = true;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);

    if (first_row) {
      first_row = false;
      const bool any_data = std::any_of(fields.begin(), fields.end(), [](std::string_view f) {
        return parse_number(f).has_value() || parse_timestamp(f).has_value();
      });
      if (!any_data) continue;  // header
    }

    if (columns == 0) {
      columns = fields.size();
      if (columns < 1 || columns > 3) fail_at(line_no, "expected 1 to 3 columns, got " + std::to_string(columns));
    } else if (fields.size() != columns) {
      fail_at(line_no, "expected " + std::to_string(columns) + " columns, got " + std::to_string(fields.size()));
    }

    std::size_t price_col = 0;
    if (columns >= 2) {
      const auto ts = parse_timestamp(fields[0]);
      if (!ts) fail_at(line_no, "unparseable timestamp '" + std::string(fields[0]) + "'");
      stamps.push_back(*ts);
      price_col = 1;
    }
    const auto price = parse_number(fields[price_col]);
    if (!price) fail_at(line_no, "unparseable price '" + std::string(fields[price_col]) + "'");
    if (!std::isfinite(*price)) fail_at(line_no, "non-finite price");
    series.values.push_back(*price);

    if (columns == 3) {
      const auto exo = parse_number(fields[2]);
      if (!exo || !std::isfinite(*exo)) fail_at(line_no, "unparseable exogenous value '" + std::string(fields[2]) + "'");
      series.exogenous.push_back(*exo);
    }

    if (stamps.size() >= 2) {
      const auto delta = stamps.back() - stamps[stamps.size() - 2];
      if (stamps.size() == 2) {
        if (delta.count() <= 0) fail_at(line_no, "timestamps must be strictly increasing");
        series.step = delta;
      } else if (delta != series.step) {
        fail_at(line_no, "gap or irregular spacing in timestamps");
      }
    }
  }

  if (series.values.empty()) throw DataError("empty series");
  if (!stamps.empty()) series.start = stamps.front();
  return series;
}

TimeSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_series(buffer.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_series(const std::filesystem::path& path, const TimeSeries& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  char buf[64];
  const bool stamped = series.start.has_value();
  out << (stamped ? "timestamp,price" : "price") << (series.has_exogenous() ? ",exogenous" : "") << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (stamped) out << format_timestamp(*series.time_at(i)) << ',';
    std::snprintf(buf, sizeof buf, "%.10g", series.values[i]);
    out << buf;
    if (series.has_exogenous()) {
      std::snprintf(buf, sizeof buf, "%.10g", series.exogenous[i]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, std::size_t n_train, std::size_t n_test) {
  if (n_train + n_test > series.size()) {
    throw DataError("split " + std::to_string(n_train) + "+" + std::to_string(n_test) + " exceeds series length " +
                    std::to_string(series.size()));
  }
  auto slice = [&](std::size_t from, std::size_t count) {
    TimeSeries part;
    part.step = series.step;
    part.start = series.time_at(from);
    part.values.assign(series.values.begin() + from, series.values.begin() + from + count);
    if (series.has_exogenous()) {
      part.exogenous.assign(series.exogenous.begin() + from, series.exogenous.begin() + from + count);
    }
    return part;
  };
  return {slice(0, n_train), slice(n_train, n_test)};
}

Scaler::Scaler(double min, double max) : min_(min), max_(max) {
  if (!(max > min)) throw DataError("constant series: scaler requires max > min");
}

Scaler Scaler::fit(std::span<const double> xs) {
  if (xs.size() < 2) throw DataError("scaler needs at least 2 values");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (!(*hi > *lo)) throw DataError("constant series");
  return Scaler(*lo, *hi);
}

std::vector<double> Scaler::transform(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return transform(x); });
  return out;
}

std::vector<double> Scaler::inverse(std::span<const double> ys) const {
  std::vector<double> out(ys.size());
  std::transform(ys.begin(), ys.end(), out.begin(), [this](double y) { return inverse(y); });
  return out;
}

std::pair<TimeSeries, Scaler> fit_scale(const TimeSeries& series) {
  const Scaler scaler = Scaler::fit(series.values);
  TimeSeries scaled = series;
  scaled.values = scaler.transform(series.values);
  return {std::move(scaled), scaler};
}

WindowedDataset make_windows(const TimeSeries& series, std::size_t window, std::size_t horizon) {
  if (window == 0 || horizon == 0) throw DataError("window and horizon must be positive");
  const std::size_t n = series.size();
  if (n < window + horizon) {
    throw DataError("series too short: length " + std::to_string(n) + " < window " + std::to_string(window) +
                    " + horizon " + std::to_string(horizon));
  }
  WindowedDataset ds;
  ds.window = window;
  ds.horizon = horizon;
  const std::size_t count = n - window - horizon + 1;
  ds.inputs.reserve(count);
  ds.targets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> input(series.values.begin() + i, series.values.begin() + i + window);
    if (series.has_exogenous()) {
      input.insert(input.end(), series.exogenous.begin() + i, series.exogenous.begin() + i + window);
    }
    ds.inputs.push_back(std::move(input));
    ds.targets.push_back(series.values[i + window + horizon - 1]);
  }
  return ds;
}

}  // namespace epf
