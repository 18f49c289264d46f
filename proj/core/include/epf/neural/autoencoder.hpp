#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "epf/neural/dense.hpp"
#include "epf/neural/train_config.hpp"

namespace epf::nn {

/// Packs equal-length vectors as the columns of a matrix.
Eigen::MatrixXd to_columns(std::span<const std::vector<double>> data, std::size_t expected_dim);

struct AutoencoderLayer {
  DenseLayer encoder;  // in -> out, sigmoid
  DenseLayer decoder;  // out -> in, sigmoid
  std::vector<double> loss_history;  // full-data MSE after each epoch
};

/// Mean squared error of decoder(encoder(x)) against x over all entries.
double reconstruction_mse(const DenseLayer& encoder, const DenseLayer& decoder, const Eigen::MatrixXd& data);

/// Gradients of reconstruction_mse with respect to both layers.
void reconstruction_grad(const DenseLayer& encoder, const DenseLayer& decoder, const Eigen::MatrixXd& data,
                         DenseGrad& encoder_grad, DenseGrad& decoder_grad);

/// Trains one autoencoder layer with mini-batch Adam. `data` holds one
/// sample per column. Zero epochs returns the seeded initialisation.
AutoencoderLayer train_autoencoder_layer(const Eigen::MatrixXd& data, std::size_t out_dim, const TrainConfig& cfg);
AutoencoderLayer train_autoencoder_layer(std::span<const std::vector<double>> data, std::size_t in_dim,
                                         std::size_t out_dim, const TrainConfig& cfg);

/// Greedy stack of sigmoid autoencoders. Only the encoders are needed for
/// inference; decoders are kept to measure reconstruction quality.
struct SaeStack {
  std::vector<std::size_t> dims;  // input, then one entry per hidden layer
  std::vector<DenseLayer> encoders;
  std::vector<DenseLayer> decoders;

  /// Seeded, untrained stack with the same initialisation build_sae uses.
  static SaeStack initial(std::span<const std::size_t> dims, std::uint64_t seed);

  std::size_t input_dim() const { return dims.front(); }
  std::size_t code_dim() const { return dims.back(); }

  Eigen::MatrixXd encode(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& inputs) const;
  double reconstruction_mse(const Eigen::MatrixXd& inputs) const;
};

/// Layer-wise pretraining: layer 1 on the raw windows, layer j on the codes
/// of layer j-1. `dims` must have four entries (input + three hidden).
SaeStack build_sae(const Eigen::MatrixXd& windows, std::span<const std::size_t> dims, const TrainConfig& cfg);

}  // namespace epf::nn
