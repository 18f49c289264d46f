#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "epf/rng.hpp"

namespace epf::nn {

enum class CellKind { Gru, Lstm };

const char* to_string(CellKind kind);
CellKind cell_kind_from_string(std::string_view name);

/// Gate parameters stacked row-wise.
///   GRU:  [update z; reset r; candidate n]
///         z = s(Wz x + Uz h + bz), r = s(Wr x + Ur h + br)
///         n = tanh(Wn x + Un (r * h) + bn), h' = (1 - z) * h + z * n
///   LSTM: [input i; forget f; cell g; output o]
///         c' = f * c + i * g, h' = o * tanh(c')
struct RecurrentCellParams {
  CellKind kind = CellKind::Gru;
  Eigen::MatrixXd w_input;   // (gates * hidden) x input
  Eigen::MatrixXd w_hidden;  // (gates * hidden) x hidden
  Eigen::VectorXd bias;      // gates * hidden

  static Eigen::Index gates(CellKind kind) { return kind == CellKind::Gru ? 3 : 4; }
  static RecurrentCellParams zeros(CellKind kind, Eigen::Index input_dim, Eigen::Index hidden_dim);
  /// Glorot-uniform per gate block, zero bias.
  static RecurrentCellParams glorot(CellKind kind, Eigen::Index input_dim, Eigen::Index hidden_dim, Rng& rng);

  Eigen::Index input_dim() const { return w_input.cols(); }
  Eigen::Index hidden_dim() const { return w_hidden.cols(); }
  std::size_t parameter_count() const {
    return static_cast<std::size_t>(w_input.size() + w_hidden.size() + bias.size());
  }
};

/// Everything the backward pass needs. hidden[0] / cell[0] are the initial
/// states; hidden[t + 1] follows input t.
struct RecurrentTrace {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> hidden;
  std::vector<Eigen::VectorXd> cell;   // LSTM only
  std::vector<Eigen::VectorXd> gates;  // post-activation gate values per step

  const Eigen::VectorXd& final_hidden() const { return hidden.back(); }
};

/// Runs the cell over a non-empty sequence. LSTM starts from a zero cell state.
RecurrentTrace recurrent_forward(const RecurrentCellParams& params, std::span<const Eigen::VectorXd> sequence,
                                 const Eigen::VectorXd& h0);

struct RecurrentGrad {
  Eigen::MatrixXd w_input;
  Eigen::MatrixXd w_hidden;
  Eigen::VectorXd bias;

  explicit RecurrentGrad(const RecurrentCellParams& p)
      : w_input(Eigen::MatrixXd::Zero(p.w_input.rows(), p.w_input.cols())),
        w_hidden(Eigen::MatrixXd::Zero(p.w_hidden.rows(), p.w_hidden.cols())),
        bias(Eigen::VectorXd::Zero(p.bias.size())) {}
};

/// Backpropagation through time. `d_hidden[t]` is dL/dh_{t+1} from outside
/// the recurrence (zero vectors where the loss does not read h). Parameter
/// gradients accumulate into `grad`; input and initial-state gradients are
/// written when the pointers are non-null.
void recurrent_backward(const RecurrentCellParams& params, const RecurrentTrace& trace,
                        std::span<const Eigen::VectorXd> d_hidden, RecurrentGrad& grad,
                        std::vector<Eigen::VectorXd>* d_inputs = nullptr, Eigen::VectorXd* d_h0 = nullptr);

}  // namespace epf::nn
