#include <cmath>

#include <gtest/gtest.h>

#include "epf/error.hpp"
#include "epf/neural/adam.hpp"
#include "epf/neural/autoencoder.hpp"
#include "epf/neural/dense.hpp"
#include "epf/neural/recurrent.hpp"
#include "support/support.hpp"

using namespace epf;
using namespace epf::nn;
using namespace epf::testing;

TEST(Dense, ZeroParamsGiveActivationOfZero) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  EXPECT_TRUE(DenseLayer::zeros(5, 4, Activation::Sigmoid).forward(x).isConstant(0.5));
  EXPECT_TRUE(DenseLayer::zeros(5, 4, Activation::Tanh).forward(x).isZero());
  EXPECT_TRUE(DenseLayer::zeros(5, 4, Activation::Identity).forward(x).isZero());
}

TEST(Dense, GlorotBoundsAndSeeding) {
  Rng a(3), b(3);
  const auto la = DenseLayer::glorot(10, 6, Activation::Tanh, a);
  const auto lb = DenseLayer::glorot(10, 6, Activation::Tanh, b);
  EXPECT_EQ(la.weights, lb.weights);
  const double bound = std::sqrt(6.0 / 16.0);
  EXPECT_LE(la.weights.cwiseAbs().maxCoeff(), bound);
  EXPECT_TRUE(la.bias.isZero());
}

TEST(Dense, ActivationNamesRoundTrip) {
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Identity}) {
    EXPECT_EQ(activation_from_string(to_string(a)), a);
  }
  EXPECT_THROW(activation_from_string("relu"), DataError);
}

TEST(Gradients, AutoencoderLayer) {
  Rng rng(101);
  for (int i = 0; i < 25; ++i) EXPECT_LT(gradcheck_autoencoder_layer(rng), 1e-4) << "instance " << i;
}

TEST(Gradients, GruCell) {
  Rng rng(102);
  for (int i = 0; i < 25; ++i) EXPECT_LT(gradcheck_recurrent(CellKind::Gru, rng), 1e-4) << "instance " << i;
}

TEST(Gradients, LstmCell) {
  Rng rng(103);
  for (int i = 0; i < 25; ++i) EXPECT_LT(gradcheck_recurrent(CellKind::Lstm, rng), 1e-4) << "instance " << i;
}

TEST(Gradients, OutputHead) {
  Rng rng(104);
  for (int i = 0; i < 25; ++i) EXPECT_LT(gradcheck_output_head(rng), 1e-4) << "instance " << i;
}

TEST(Gradients, FullPredictor) {
  Rng rng(105);
  for (int i = 0; i < 10; ++i) {
    EXPECT_LT(gradcheck_predictor(CellKind::Gru, rng), 1e-4) << "gru " << i;
    EXPECT_LT(gradcheck_predictor(CellKind::Lstm, rng), 1e-4) << "lstm " << i;
  }
}

TEST(Autoencoder, MemorisesSingleVector) {
  Eigen::MatrixXd data(6, 32);
  Eigen::VectorXd v(6);
  v << 0.1, 0.9, 0.3, 0.7, 0.5, 0.2;
  data.colwise() = v;
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.batch_size = 8;
  cfg.adam.learning_rate = 0.01;
  cfg.seed = 4;
  const auto layer = train_autoencoder_layer(data, 3, cfg);
  EXPECT_LT(reconstruction_mse(layer.encoder, layer.decoder, data), 1e-3);
  EXPECT_LE(layer.loss_history.back(), layer.loss_history.front());
}

TEST(Autoencoder, ZeroEpochsReturnsInitialisation) {
  const Eigen::MatrixXd data = (Eigen::MatrixXd::Random(5, 10).array() + 1.0) / 2.0;
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 17;
  const auto layer = train_autoencoder_layer(data, 3, cfg);
  const std::vector<std::size_t> dims{5, 3};
  const auto init = SaeStack::initial(dims, 17);
  EXPECT_EQ(layer.encoder.weights, init.encoders[0].weights);
  EXPECT_EQ(layer.decoder.weights, init.decoders[0].weights);
  EXPECT_TRUE(layer.loss_history.empty());
}

TEST(Autoencoder, RejectsBadInput) {
  TrainConfig cfg;
  std::vector<std::vector<double>> data{{1, 2, 3}, {1, 2}};
  EXPECT_THROW(train_autoencoder_layer(data, 3, 2, cfg), DataError);
  std::vector<std::vector<double>> empty;
  EXPECT_THROW(train_autoencoder_layer(empty, 3, 2, cfg), DataError);
}

namespace {

Eigen::MatrixXd sine_windows(std::size_t count, std::size_t width) {
  const auto x = sine(count + width, static_cast<double>(count + width) / 24.0, 0.4);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t i = 0; i < width; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.5 + x[i + j];
  }
  return m;
}

}  // namespace

TEST(Sae, TrainingBeatsUntrainedStack) {
  const auto windows = sine_windows(300, 24);
  const std::vector<std::size_t> dims{24, 16, 12, 8};
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 32;
  cfg.adam.learning_rate = 0.005;
  cfg.seed = 9;
  const auto trained = build_sae(windows, dims, cfg);
  const auto untrained = SaeStack::initial(dims, 9);
  EXPECT_LT(trained.reconstruction_mse(windows), untrained.reconstruction_mse(windows));
  EXPECT_EQ(trained.encode(windows).rows(), 8);
}

TEST(Sae, NeedsFourDims) {
  const auto windows = sine_windows(20, 24);
  const std::vector<std::size_t> dims{24, 16, 8};
  EXPECT_THROW(build_sae(windows, dims, TrainConfig{}), ConfigError);
}

TEST(Sae, ZeroStackEncodesToHalf) {
  SaeStack s;
  s.dims = {24, 16, 12, 8};
  for (std::size_t j = 0; j < 3; ++j) {
    s.encoders.push_back(DenseLayer::zeros(static_cast<Eigen::Index>(s.dims[j]), static_cast<Eigen::Index>(s.dims[j + 1]),
                                           Activation::Sigmoid));
  }
  EXPECT_TRUE(s.encode(Eigen::MatrixXd::Zero(24, 1)).isConstant(0.5));
}

TEST(Recurrent, ZeroParamsZeroStateStaysZero) {
  for (auto kind : {CellKind::Gru, CellKind::Lstm}) {
    const auto p = RecurrentCellParams::zeros(kind, 3, 4);
    std::vector<Eigen::VectorXd> seq(5, Eigen::VectorXd::Ones(3));
    const auto tr = recurrent_forward(p, seq, Eigen::VectorXd::Zero(4));
    for (const auto& h : tr.hidden) EXPECT_TRUE(h.isZero());
  }
}

TEST(Recurrent, GruZeroParamsHalvesState) {
  const auto p = RecurrentCellParams::zeros(CellKind::Gru, 2, 3);
  Eigen::VectorXd v(3);
  v << 1.0, -2.0, 0.5;
  std::vector<Eigen::VectorXd> seq{Eigen::VectorXd::Zero(2)};
  const auto tr = recurrent_forward(p, seq, v);
  EXPECT_TRUE(tr.final_hidden().isApprox(0.5 * v));
}

TEST(Recurrent, GruHasFewerParameters) {
  Rng rng(1);
  for (Eigen::Index in : {1, 8, 24}) {
    for (Eigen::Index h : {1, 16, 32}) {
      const auto gru = RecurrentCellParams::glorot(CellKind::Gru, in, h, rng);
      const auto lstm = RecurrentCellParams::glorot(CellKind::Lstm, in, h, rng);
      EXPECT_LT(gru.parameter_count(), lstm.parameter_count());
      EXPECT_EQ(gru.parameter_count(), static_cast<std::size_t>(3 * h * (in + h + 1)));
      EXPECT_EQ(lstm.parameter_count(), static_cast<std::size_t>(4 * h * (in + h + 1)));
    }
  }
}

TEST(Recurrent, DimensionMismatch) {
  const auto p = RecurrentCellParams::zeros(CellKind::Gru, 3, 4);
  std::vector<Eigen::VectorXd> seq{Eigen::VectorXd::Zero(2)};
  EXPECT_THROW(recurrent_forward(p, seq, Eigen::VectorXd::Zero(4)), DataError);
  std::vector<Eigen::VectorXd> empty;
  EXPECT_THROW(recurrent_forward(p, empty, Eigen::VectorXd::Zero(4)), DataError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam adam(AdamConfig{.learning_rate = 0.1});
  Eigen::VectorXd x(2);
  x << 1.0, -1.0;
  AdamSlot<Eigen::VectorXd> slot(x);
  Eigen::VectorXd g(2);
  g << 3.0, -0.5;
  adam.tick();
  adam.update(x, g, slot);
  EXPECT_NEAR(x(0), 0.9, 1e-6);
  EXPECT_NEAR(x(1), -0.9, 1e-6);
}
