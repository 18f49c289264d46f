#include "epf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "epf/error.hpp"

namespace epf {
namespace {

void check_pair(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw DataError("metric inputs differ in length: " + std::to_string(actual.size()) + " vs " +
                    std::to_string(predicted.size()));
  }
  if (actual.empty()) throw DataError("metric inputs are empty");
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
  return sum / static_cast<double>(actual.size());
}

MetricReport evaluate(std::string model, std::size_t horizon, std::span<const double> actual,
                      std::span<const double> predicted) {
  MetricReport r;
  r.model = std::move(model);
  r.horizon = horizon;
  r.rmse = rmse(actual, predicted);
  r.mae = mae(actual, predicted);
  r.n_samples = actual.size();
  // Power-mean inequality; a violation means the metric code is broken.
  if (r.rmse < r.mae * (1.0 - 1e-12)) throw NumericError("rmse < mae for " + r.model);
  return r;
}

bool BenchmarkTable::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const MetricReport& c) { return c.ok; });
}

std::string table_to_csv(const BenchmarkTable& t) {
  std::ostringstream out;
  out << "model,metric";
  for (auto h : t.horizons) out << ",h" << h;
  out << '\n';
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    for (const char* metric : {"RMSE", "MAE"}) {
      out << t.models[m] << ',' << metric;
      for (std::size_t h = 0; h < t.horizons.size(); ++h) {
        const auto& c = t.at(m, h);
        out << ',' << (c.ok ? fixed(metric[0] == 'R' ? c.rmse : c.mae) : std::string("FAILED"));
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string table_to_text(const BenchmarkTable& t) {
  std::size_t name_width = 5;
  for (const auto& m : t.models) name_width = std::max(name_width, m.size());
  const int col = 10;
  std::ostringstream out;
  char buf[64];

  auto pad = [&](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  out << pad("Model", name_width) << " | " << pad("RMSE", static_cast<std::size_t>(col) * t.horizons.size())
      << " | MAE\n";
  out << pad("Horizon (h)", name_width) << " |";
  for (int pass = 0; pass < 2; ++pass) {
    for (auto h : t.horizons) {
      std::snprintf(buf, sizeof buf, "%*zu", col, h);
      out << buf;
    }
    if (pass == 0) out << " |";
  }
  out << '\n' << std::string(name_width + 5 + 2 * col * t.horizons.size(), '-') << '\n';
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    out << pad(t.models[m], name_width) << " |";
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t h = 0; h < t.horizons.size(); ++h) {
        const auto& c = t.at(m, h);
        if (c.ok) {
          std::snprintf(buf, sizeof buf, "%*.3f", col, pass == 0 ? c.rmse : c.mae);
        } else {
          std::snprintf(buf, sizeof buf, "%*s", col, "FAILED");
        }
        out << buf;
      }
      if (pass == 0) out << " |";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace epf
