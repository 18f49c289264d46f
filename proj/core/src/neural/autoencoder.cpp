#include "epf/neural/autoencoder.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "epf/error.hpp"
#include "epf/rng.hpp"
#include "shuffle.hpp"

namespace epf::nn {

void TrainConfig::validate(const char* prefix) const {
  const std::string p = std::string(prefix) + ".";
  if (batch_size < 1) throw ConfigError(p + "batch_size: must be >= 1");
  if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate)) {
    throw ConfigError(p + "learning_rate: must be > 0");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigError(p + "beta1: must be in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigError(p + "beta2: must be in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError(p + "epsilon: must be > 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError(p + "validation_fraction: must be in [0, 1)");
  }
}

Eigen::MatrixXd to_columns(std::span<const std::vector<double>> data, std::size_t expected_dim) {
  if (data.empty()) throw DataError("no training samples");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(expected_dim), static_cast<Eigen::Index>(data.size()));
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (data[j].size() != expected_dim) {
      throw DataError("sample " + std::to_string(j) + " has dim " + std::to_string(data[j].size()) + ", expected " +
                      std::to_string(expected_dim));
    }
    for (std::size_t i = 0; i < expected_dim; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[j][i];
    }
  }
  return m;
}

double reconstruction_mse(const DenseLayer& encoder, const DenseLayer& decoder, const Eigen::MatrixXd& data) {
  const Eigen::MatrixXd out = decoder.forward(encoder.forward(data));
  return (out - data).squaredNorm() / static_cast<double>(data.size());
}

void reconstruction_grad(const DenseLayer& encoder, const DenseLayer& decoder, const Eigen::MatrixXd& data,
                         DenseGrad& encoder_grad, DenseGrad& decoder_grad) {
  const Eigen::MatrixXd code = encoder.forward(data);
  const Eigen::MatrixXd out = decoder.forward(code);
  const Eigen::MatrixXd d_out = (2.0 / static_cast<double>(data.size())) * (out - data);
  const Eigen::MatrixXd d_code = backward(decoder, code, out, d_out, decoder_grad);
  backward(encoder, data, code, d_code, encoder_grad);
}

namespace {

std::pair<DenseLayer, DenseLayer> initial_pair(Eigen::Index in, Eigen::Index out, std::uint64_t seed) {
  Rng rng(seed);
  DenseLayer enc = DenseLayer::glorot(in, out, Activation::Sigmoid, rng);
  DenseLayer dec = DenseLayer::glorot(out, in, Activation::Sigmoid, rng);
  return {std::move(enc), std::move(dec)};
}

}  // namespace

AutoencoderLayer train_autoencoder_layer(const Eigen::MatrixXd& data, std::size_t out_dim, const TrainConfig& cfg) {
  cfg.validate("sae");
  if (data.cols() == 0) throw DataError("autoencoder needs at least one sample");
  if (out_dim < 1) throw DataError("autoencoder code dim must be >= 1");

  auto [enc, dec] = initial_pair(data.rows(), static_cast<Eigen::Index>(out_dim), cfg.seed);
  AutoencoderLayer layer{std::move(enc), std::move(dec), {}};
  if (cfg.epochs == 0) return layer;

  Adam adam(cfg.adam);
  AdamSlot<Eigen::MatrixXd> enc_w(layer.encoder.weights), dec_w(layer.decoder.weights);
  AdamSlot<Eigen::VectorXd> enc_b(layer.encoder.bias), dec_b(layer.decoder.bias);

  const auto n = static_cast<std::size_t>(data.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(detail::shuffle_seed(cfg.seed));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    detail::shuffle(order, shuffle_rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      Eigen::MatrixXd batch(data.rows(), static_cast<Eigen::Index>(stop - start));
      for (std::size_t j = start; j < stop; ++j) {
        batch.col(static_cast<Eigen::Index>(j - start)) = data.col(static_cast<Eigen::Index>(order[j]));
      }
      DenseGrad g_enc(layer.encoder), g_dec(layer.decoder);
      reconstruction_grad(layer.encoder, layer.decoder, batch, g_enc, g_dec);
      adam.tick();
      adam.update(layer.encoder.weights, g_enc.weights, enc_w);
      adam.update(layer.encoder.bias, g_enc.bias, enc_b);
      adam.update(layer.decoder.weights, g_dec.weights, dec_w);
      adam.update(layer.decoder.bias, g_dec.bias, dec_b);
    }
    const double loss = reconstruction_mse(layer.encoder, layer.decoder, data);
    if (!std::isfinite(loss)) throw NumericError("autoencoder loss diverged at epoch " + std::to_string(epoch + 1));
    layer.loss_history.push_back(loss);
  }
  return layer;
}

AutoencoderLayer train_autoencoder_layer(std::span<const std::vector<double>> data, std::size_t in_dim,
                                         std::size_t out_dim, const TrainConfig& cfg) {
  return train_autoencoder_layer(to_columns(data, in_dim), out_dim, cfg);
}

SaeStack SaeStack::initial(std::span<const std::size_t> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw DataError("stack needs at least an input and one hidden dim");
  SaeStack s;
  s.dims.assign(dims.begin(), dims.end());
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    auto [enc, dec] = initial_pair(static_cast<Eigen::Index>(dims[j]), static_cast<Eigen::Index>(dims[j + 1]), seed + j);
    s.encoders.push_back(std::move(enc));
    s.decoders.push_back(std::move(dec));
  }
  return s;
}

Eigen::MatrixXd SaeStack::encode(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd x = inputs;
  for (const auto& e : encoders) x = e.forward(x);
  return x;
}

Eigen::MatrixXd SaeStack::reconstruct(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd x = encode(inputs);
  for (auto it = decoders.rbegin(); it != decoders.rend(); ++it) x = it->forward(x);
  return x;
}

double SaeStack::reconstruction_mse(const Eigen::MatrixXd& inputs) const {
  return (reconstruct(inputs) - inputs).squaredNorm() / static_cast<double>(inputs.size());
}

SaeStack build_sae(const Eigen::MatrixXd& windows, std::span<const std::size_t> dims, const TrainConfig& cfg) {
  if (dims.size() != 4) {
    throw ConfigError("sae.dims: expected 4 entries (input + three hidden), got " + std::to_string(dims.size()));
  }
  if (static_cast<std::size_t>(windows.rows()) != dims[0]) {
    throw DataError("SAE input dim " + std::to_string(dims[0]) + " does not match window length " +
                    std::to_string(windows.rows()));
  }
  SaeStack s;
  s.dims.assign(dims.begin(), dims.end());
  Eigen::MatrixXd codes = windows;
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    TrainConfig layer_cfg = cfg;
    layer_cfg.seed = cfg.seed + j;
    AutoencoderLayer layer = train_autoencoder_layer(codes, dims[j + 1], layer_cfg);
    codes = layer.encoder.forward(codes);
    s.encoders.push_back(std::move(layer.encoder));
    s.decoders.push_back(std::move(layer.decoder));
  }
  return s;
}

}  // namespace epf::nn
