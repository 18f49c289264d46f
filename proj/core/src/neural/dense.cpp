#include "epf/neural/dense.hpp"

#include <cmath>
#include <string>

#include "epf/error.hpp"

namespace epf::nn {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Tanh:
      return "tanh";
    case Activation::Identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw DataError("unknown activation '" + std::string(name) + "'");
}

void activate(Activation a, Eigen::Ref<Eigen::MatrixXd> values) {
  switch (a) {
    case Activation::Sigmoid:
      values = (1.0 + (-values.array()).exp()).inverse().matrix();
      break;
    case Activation::Tanh:
      values = values.array().tanh().matrix();
      break;
    case Activation::Identity:
      break;
  }
}

Eigen::MatrixXd activation_grad(Activation a, const Eigen::MatrixXd& y) {
  switch (a) {
    case Activation::Sigmoid:
      return (y.array() * (1.0 - y.array())).matrix();
    case Activation::Tanh:
      return (1.0 - y.array().square()).matrix();
    case Activation::Identity:
      break;
  }
  return Eigen::MatrixXd::Ones(y.rows(), y.cols());
}

void glorot_fill(Eigen::Ref<Eigen::MatrixXd> m, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
  }
}

DenseLayer DenseLayer::zeros(Eigen::Index in, Eigen::Index out, Activation act) {
  return DenseLayer{Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out), act};
}

DenseLayer DenseLayer::glorot(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng) {
  DenseLayer layer = zeros(in, out, act);
  glorot_fill(layer.weights, in, out, rng);
  return layer;
}

Eigen::MatrixXd DenseLayer::forward(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != in_dim()) {
    throw DataError("dense layer expects input dim " + std::to_string(in_dim()) + ", got " +
                    std::to_string(inputs.rows()));
  }
  Eigen::MatrixXd out = weights * inputs;
  out.colwise() += bias;
  activate(activation, out);
  return out;
}

Eigen::MatrixXd backward(const DenseLayer& layer, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                         const Eigen::MatrixXd& d_outputs, DenseGrad& grad) {
  const Eigen::MatrixXd d_pre = d_outputs.cwiseProduct(activation_grad(layer.activation, outputs));
  grad.weights.noalias() += d_pre * inputs.transpose();
  grad.bias += d_pre.rowwise().sum();
  return layer.weights.transpose() * d_pre;
}

}  // namespace epf::nn
