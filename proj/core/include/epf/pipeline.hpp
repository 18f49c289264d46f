#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epf/denoise.hpp"
#include "epf/emd.hpp"
#include "epf/eval.hpp"
#include "epf/neural/forecaster.hpp"
#include "epf/timeseries.hpp"

namespace epf {

/// Full experiment description. Defaults reproduce the reference protocol:
/// 28032/7008 split, 24-hour windows, horizons {3, 6, 9, 12}, 100 noise
/// realizations and a PE threshold of 0.7.
struct PipelineConfig {
  std::filesystem::path data_path;
  std::size_t n_train = 28032;
  std::size_t n_test = 7008;

  std::size_t window = 24;
  std::vector<std::size_t> horizons{3, 6, 9, 12};
  std::size_t seq_len = 8;

  CeemdanConfig ceemdan;
  PeConfig pe;
  double pe_threshold = 0.7;

  // Empty means {input width, 16, 12, 8}.
  std::vector<std::size_t> sae_dims;
  nn::TrainConfig sae_train{.epochs = 100, .batch_size = 64, .adam = {}, .seed = 0, .patience = 0,
                            .validation_fraction = 0.0};

  std::vector<nn::CellKind> cells{nn::CellKind::Gru, nn::CellKind::Lstm};
  std::size_t hidden_dim = 32;
  nn::TrainConfig train;

  std::size_t trace_horizon = 3;
  std::size_t trace_offset = 0;
  std::size_t trace_length = 288;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 2023;
  // Parallel benchmark cells and CEEMDAN realizations; 0 = hardware.
  unsigned threads = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// SAE dims with the input width filled in for a given series.
  std::vector<std::size_t> resolved_sae_dims(bool exogenous) const;
  /// Stable hash of every setting that influences results.
  std::string hash() const;
};

/// Parses a JSON config. Unknown keys and type errors raise ConfigError
/// with the field path. Relative data paths resolve against `base_dir`.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

/// Independent, reproducible seeds for each stage of a run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);
CeemdanConfig ceemdan_for_run(const PipelineConfig& config);

std::string model_label(nn::CellKind kind);

/// Train/test split with denoised, scaled inputs and raw, scaled targets.
struct PreparedData {
  TimeSeries train_raw;
  TimeSeries test_raw;
  Scaler scaler;
  std::optional<Scaler> exogenous_scaler;
  DenoiseResult train_denoised;
  DenoiseResult test_denoised;
  TimeSeries train_inputs;  // denoised then scaled
  TimeSeries test_inputs;
  TimeSeries train_targets;  // raw then scaled
  TimeSeries test_targets;
};

PreparedData prepare_data(const TimeSeries& series, const PipelineConfig& config);

/// Windows over `inputs` whose targets come from `targets` at the same index.
WindowedDataset windows_with_targets(const TimeSeries& inputs, const TimeSeries& targets, std::size_t window,
                                     std::size_t horizon);

nn::SaeStack pretrain_sae(const PreparedData& data, const PipelineConfig& config);

nn::ForecastModel train_model(const PreparedData& data, const nn::SaeStack& sae, nn::CellKind kind,
                              std::size_t horizon, const PipelineConfig& config);

/// Test-set predictions in price units. target_index[i] indexes test_raw.
struct TestPredictions {
  std::vector<std::size_t> target_index;
  std::vector<double> actual;
  std::vector<double> predicted;
};

TestPredictions predict_test(const nn::ForecastModel& model, const PreparedData& data);

struct TraceRow {
  std::string timestamp;
  double actual = 0.0;
  std::optional<double> gru;
  std::optional<double> lstm;
};

struct BenchmarkResult {
  BenchmarkTable table;
  std::vector<TraceRow> trace;
  DenoiseReport train_report;
};

/// Denoise, pretrain, train every (cell, horizon) model and score it on the
/// raw test prices. A failing cell is marked in the table; the rest run.
BenchmarkResult run_benchmark(const TimeSeries& series, const PipelineConfig& config);

std::string trace_to_csv(const std::vector<TraceRow>& rows);

/// Writes table.csv, table.txt, trace.csv and denoise_report.json.
void write_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir);

}  // namespace epf
