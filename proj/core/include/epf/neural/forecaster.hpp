#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epf/neural/autoencoder.hpp"
#include "epf/neural/dense.hpp"
#include "epf/neural/recurrent.hpp"
#include "epf/neural/train_config.hpp"
#include "epf/timeseries.hpp"

namespace epf::nn {

/// SAE codes of consecutive windows. Sample j is the run of codes
/// [j, j + seq_len) and predicts the target of its last window.
struct SequenceDataset {
  std::vector<Eigen::VectorXd> codes;
  std::vector<double> targets;  // aligned with codes
  std::size_t seq_len = 8;

  std::size_t size() const { return codes.size() >= seq_len ? codes.size() - seq_len + 1 : 0; }
  std::span<const Eigen::VectorXd> sequence(std::size_t j) const { return {codes.data() + j, seq_len}; }
  double target(std::size_t j) const { return targets[j + seq_len - 1]; }
};

/// Encodes every window with the stack and pairs it with its target.
SequenceDataset encode_sequences(const SaeStack& sae, const WindowedDataset& windows, std::size_t seq_len);

/// Recurrent cell followed by a linear hidden -> 1 head.
struct PredictorWeights {
  RecurrentCellParams cell;
  DenseLayer head;
};

double predict(const PredictorWeights& w, std::span<const Eigen::VectorXd> sequence);

/// Squared error of one sample; gradients are accumulated scaled by `scale`.
double accumulate_sample_grad(const PredictorWeights& w, std::span<const Eigen::VectorXd> sequence, double target,
                              double scale, RecurrentGrad& cell_grad, DenseGrad& head_grad);

struct TrainingHistory {
  std::vector<double> train_loss;       // MSE over the training part, per epoch
  std::vector<double> validation_loss;  // empty when no validation tail
  std::size_t best_epoch = 0;           // 1-based; 0 when no epochs ran
};

struct TrainedPredictor {
  PredictorWeights weights;
  TrainingHistory history;
};

/// Mini-batch Adam with BPTT on the MSE in scaled space. The last
/// validation_fraction of samples (chronologically) drives early stopping
/// and the best-scoring weights are returned. Throws NumericError if the
/// loss becomes non-finite.
TrainedPredictor train_forecaster(const SequenceDataset& data, CellKind kind, std::size_t hidden_dim,
                                  const TrainConfig& cfg);

/// Everything needed to turn recent prices into a forecast.
struct ForecastModel {
  SaeStack sae;  // encoders only after loading
  PredictorWeights predictor;
  Scaler scaler;
  std::optional<Scaler> exogenous_scaler;
  std::size_t window = 24;
  std::size_t horizon = 3;
  std::size_t seq_len = 8;
  TrainingHistory history;
  std::string config_hash;

  /// Number of trailing observations a forecast consumes: window + seq_len - 1.
  std::size_t input_span() const { return window + seq_len - 1; }
};

/// Forecast `horizon` steps past the last of `recent` (price units). `recent`
/// must hold exactly input_span() values; `recent_exogenous` likewise when
/// the model was trained with an exogenous channel.
double forecast(const ForecastModel& model, std::span<const double> recent,
                std::span<const double> recent_exogenous = {});

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const ForecastModel& model);
/// Throws DataError on malformed input or a format version mismatch.
ForecastModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const ForecastModel& model);
ForecastModel load_model(const std::filesystem::path& path);

}  // namespace epf::nn
