#include "epf/neural/recurrent.hpp"

#include <string>

#include "epf/error.hpp"
#include "epf/neural/dense.hpp"

namespace epf::nn {
namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

}  // namespace

const char* to_string(CellKind kind) { return kind == CellKind::Gru ? "gru" : "lstm"; }

CellKind cell_kind_from_string(std::string_view name) {
  if (name == "gru" || name == "GRU") return CellKind::Gru;
  if (name == "lstm" || name == "LSTM") return CellKind::Lstm;
  throw ConfigError("unknown cell kind '" + std::string(name) + "' (expected gru or lstm)");
}

RecurrentCellParams RecurrentCellParams::zeros(CellKind kind, Eigen::Index input_dim, Eigen::Index hidden_dim) {
  const Eigen::Index rows = gates(kind) * hidden_dim;
  return {kind, Eigen::MatrixXd::Zero(rows, input_dim), Eigen::MatrixXd::Zero(rows, hidden_dim),
          Eigen::VectorXd::Zero(rows)};
}

RecurrentCellParams RecurrentCellParams::glorot(CellKind kind, Eigen::Index input_dim, Eigen::Index hidden_dim,
                                                Rng& rng) {
  RecurrentCellParams p = zeros(kind, input_dim, hidden_dim);
  for (Eigen::Index g = 0; g < gates(kind); ++g) {
    glorot_fill(p.w_input.middleRows(g * hidden_dim, hidden_dim), input_dim, hidden_dim, rng);
    glorot_fill(p.w_hidden.middleRows(g * hidden_dim, hidden_dim), hidden_dim, hidden_dim, rng);
  }
  return p;
}

RecurrentTrace recurrent_forward(const RecurrentCellParams& p, std::span<const Eigen::VectorXd> sequence,
                                 const Eigen::VectorXd& h0) {
  if (sequence.empty()) throw DataError("recurrent input sequence is empty");
  const Eigen::Index H = p.hidden_dim();
  if (h0.size() != H) throw DataError("initial hidden state has wrong dimension");

  RecurrentTrace tr;
  tr.inputs.assign(sequence.begin(), sequence.end());
  tr.hidden.reserve(sequence.size() + 1);
  tr.hidden.push_back(h0);
  if (p.kind == CellKind::Lstm) tr.cell.push_back(Eigen::VectorXd::Zero(H));

  for (const auto& x : sequence) {
    if (x.size() != p.input_dim()) {
      throw DataError("recurrent input dim " + std::to_string(x.size()) + ", expected " +
                      std::to_string(p.input_dim()));
    }
    const Eigen::VectorXd& h = tr.hidden.back();
    const Eigen::VectorXd ax = p.w_input * x + p.bias;

    if (p.kind == CellKind::Gru) {
      Eigen::VectorXd gates(3 * H);
      const Eigen::VectorXd zr = sigmoid(ax.head(2 * H) + p.w_hidden.topRows(2 * H) * h);
      const Eigen::VectorXd z = zr.head(H);
      const Eigen::VectorXd r = zr.tail(H);
      const Eigen::VectorXd n =
          (ax.tail(H) + p.w_hidden.bottomRows(H) * r.cwiseProduct(h)).array().tanh().matrix();
      gates << z, r, n;
      tr.hidden.push_back((Eigen::VectorXd::Ones(H) - z).cwiseProduct(h) + z.cwiseProduct(n));
      tr.gates.push_back(std::move(gates));
    } else {
      const Eigen::VectorXd a = ax + p.w_hidden * h;
      Eigen::VectorXd gates(4 * H);
      gates.segment(0, 2 * H) = sigmoid(a.segment(0, 2 * H));
      gates.segment(2 * H, H) = a.segment(2 * H, H).array().tanh().matrix();
      gates.segment(3 * H, H) = sigmoid(a.segment(3 * H, H));
      const Eigen::VectorXd c = gates.segment(H, H).cwiseProduct(tr.cell.back()) +
                                gates.segment(0, H).cwiseProduct(gates.segment(2 * H, H));
      tr.hidden.push_back(gates.segment(3 * H, H).cwiseProduct(c.array().tanh().matrix()));
      tr.cell.push_back(c);
      tr.gates.push_back(std::move(gates));
    }
  }
  return tr;
}

void recurrent_backward(const RecurrentCellParams& p, const RecurrentTrace& tr,
                        std::span<const Eigen::VectorXd> d_hidden, RecurrentGrad& grad,
                        std::vector<Eigen::VectorXd>* d_inputs, Eigen::VectorXd* d_h0) {
  const std::size_t steps = tr.inputs.size();
  if (d_hidden.size() != steps) throw DataError("hidden-state gradient count does not match sequence length");
  const Eigen::Index H = p.hidden_dim();
  if (d_inputs) d_inputs->assign(steps, Eigen::VectorXd());

  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);

  for (std::size_t t = steps; t-- > 0;) {
    const Eigen::VectorXd& x = tr.inputs[t];
    const Eigen::VectorXd& h_prev = tr.hidden[t];
    const Eigen::VectorXd& g = tr.gates[t];
    const Eigen::VectorXd dh = d_hidden[t] + dh_next;
    Eigen::VectorXd da(g.size());

    if (p.kind == CellKind::Gru) {
      const auto z = g.segment(0, H).array();
      const auto r = g.segment(H, H).array();
      const auto n = g.segment(2 * H, H).array();
      const Eigen::ArrayXd dn = dh.array() * z;
      const Eigen::ArrayXd dz = dh.array() * (n - h_prev.array());
      const Eigen::ArrayXd da_n = dn * (1.0 - n.square());
      const Eigen::VectorXd rh = (r * h_prev.array()).matrix();
      const Eigen::VectorXd d_rh = p.w_hidden.bottomRows(H).transpose() * da_n.matrix();
      const Eigen::ArrayXd dr = d_rh.array() * h_prev.array();
      da.segment(0, H) = (dz * z * (1.0 - z)).matrix();
      da.segment(H, H) = (dr * r * (1.0 - r)).matrix();
      da.segment(2 * H, H) = da_n.matrix();

      grad.w_hidden.topRows(2 * H).noalias() += da.head(2 * H) * h_prev.transpose();
      grad.w_hidden.bottomRows(H).noalias() += da_n.matrix() * rh.transpose();
      dh_next = (dh.array() * (1.0 - z) + d_rh.array() * r).matrix() +
                p.w_hidden.topRows(2 * H).transpose() * da.head(2 * H);
    } else {
      const auto i = g.segment(0, H).array();
      const auto f = g.segment(H, H).array();
      const auto gg = g.segment(2 * H, H).array();
      const auto o = g.segment(3 * H, H).array();
      const Eigen::ArrayXd tc = tr.cell[t + 1].array().tanh();
      const Eigen::ArrayXd dc = dc_next.array() + dh.array() * o * (1.0 - tc.square());
      da.segment(0, H) = (dc * gg * i * (1.0 - i)).matrix();
      da.segment(H, H) = (dc * tr.cell[t].array() * f * (1.0 - f)).matrix();
      da.segment(2 * H, H) = (dc * i * (1.0 - gg.square())).matrix();
      da.segment(3 * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();

      grad.w_hidden.noalias() += da * h_prev.transpose();
      dh_next = p.w_hidden.transpose() * da;
      dc_next = (dc * f).matrix();
    }

    grad.w_input.noalias() += da * x.transpose();
    grad.bias += da;
    if (d_inputs) (*d_inputs)[t] = p.w_input.transpose() * da;
  }
  if (d_h0) *d_h0 = dh_next;
}

}  // namespace epf::nn
