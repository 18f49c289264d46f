#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace epf {

/// Root mean squared error. Inputs must be non-empty and equal in length.
double rmse(std::span<const double> actual, std::span<const double> predicted);
/// Mean absolute error. Inputs must be non-empty and equal in length.
double mae(std::span<const double> actual, std::span<const double> predicted);

struct MetricReport {
  std::string model;
  std::size_t horizon = 0;
  double rmse = 0.0;  // price units
  double mae = 0.0;   // price units
  std::size_t n_samples = 0;
  bool ok = true;
  std::string failure;
};

MetricReport evaluate(std::string model, std::size_t horizon, std::span<const double> actual,
                      std::span<const double> predicted);

/// Models x horizons grid, laid out like a two-metric comparison table.
struct BenchmarkTable {
  std::vector<std::string> models;
  std::vector<std::size_t> horizons;
  std::vector<MetricReport> cells;  // row-major: models outer, horizons inner

  const MetricReport& at(std::size_t model, std::size_t horizon_index) const {
    return cells[model * horizons.size() + horizon_index];
  }
  bool all_ok() const;
};

/// One row per (model, metric); one column per horizon; failed cells are
/// written as FAILED.
std::string table_to_csv(const BenchmarkTable& table);
/// Aligned plain-text rendering of the same grid.
std::string table_to_text(const BenchmarkTable& table);

}  // namespace epf
