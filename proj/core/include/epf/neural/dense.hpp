#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "epf/rng.hpp"

namespace epf::nn {

enum class Activation { Sigmoid, Tanh, Identity };

const char* to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Applies the activation in place.
void activate(Activation a, Eigen::Ref<Eigen::MatrixXd> values);
/// Derivative expressed through the activation's output y = f(a).
Eigen::MatrixXd activation_grad(Activation a, const Eigen::MatrixXd& y);

/// Fully connected layer y = f(W x + b). Batches are column-major: one
/// sample per column.
struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::Identity;

  static DenseLayer zeros(Eigen::Index in, Eigen::Index out, Activation act);
  /// Uniform in +-sqrt(6 / (in + out)), bias zero.
  static DenseLayer glorot(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng);

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
};

struct DenseGrad {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  explicit DenseGrad(const DenseLayer& layer)
      : weights(Eigen::MatrixXd::Zero(layer.out_dim(), layer.in_dim())),
        bias(Eigen::VectorXd::Zero(layer.out_dim())) {}
};

/// Accumulates parameter gradients into `grad` and returns dL/dinputs.
/// `outputs` must be the result of forward(inputs).
Eigen::MatrixXd backward(const DenseLayer& layer, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                         const Eigen::MatrixXd& d_outputs, DenseGrad& grad);

/// Glorot-uniform fill for any matrix shape.
void glorot_fill(Eigen::Ref<Eigen::MatrixXd> m, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

}  // namespace epf::nn
