#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace epf::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates for one parameter tensor.
template <typename Tensor>
struct AdamSlot {
  Tensor m;
  Tensor v;

  explicit AdamSlot(const Tensor& like) : m(Tensor::Zero(like.rows(), like.cols())), v(m) {}
};

class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  /// Call once per optimisation step, before the per-tensor updates.
  void tick() {
    ++step_;
    correction1_ = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    correction2_ = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  }

  template <typename Tensor>
  void update(Tensor& param, const Tensor& grad, AdamSlot<Tensor>& slot) const {
    slot.m = config_.beta1 * slot.m + (1.0 - config_.beta1) * grad;
    slot.v = config_.beta2 * slot.v + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
    const double lr = config_.learning_rate;
    const double c1 = correction1_;
    const double c2 = correction2_;
    const double eps = config_.epsilon;
    param.array() -= lr * (slot.m.array() / c1) / ((slot.v.array() / c2).sqrt() + eps);
  }

  long step() const { return step_; }

 private:
  AdamConfig config_;
  long step_ = 0;
  double correction1_ = 1.0;
  double correction2_ = 1.0;
};

}  // namespace epf::nn
