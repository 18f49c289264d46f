#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include "epf/neural/autoencoder.hpp"
#include "epf/neural/dense.hpp"
#include "epf/neural/forecaster.hpp"

namespace epf::testing {

std::vector<double> sine(std::size_t n, double periods, double amplitude, double phase) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = amplitude * std::sin(2.0 * std::numbers::pi * periods * static_cast<double>(t) / static_cast<double>(n) + phase);
  }
  return x;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = sigma * rng.normal();
  return x;
}

std::vector<double> add(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double stddev(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double snr_db(std::span<const double> clean, std::span<const double> x) {
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    signal += clean[i] * clean[i];
    noise += (clean[i] - x[i]) * (clean[i] - x[i]);
  }
  return 10.0 * std::log10(signal / noise);
}

NoisySine noisy_sine(std::size_t n, double period, double snr, std::uint64_t seed) {
  NoisySine s;
  s.clean = sine(n, static_cast<double>(n) / period);
  auto noise = white_noise(n, seed);
  double ps = 0.0, pn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ps += s.clean[i] * s.clean[i];
    pn += noise[i] * noise[i];
  }
  const double scale = std::sqrt(ps / (pn * std::pow(10.0, snr / 10.0)));
  for (auto& v : noise) v *= scale;
  s.noisy = add(s.clean, noise);
  return s;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

constexpr double kStep = 1e-5;

// Central difference of `loss` with respect to every entry of `param`,
// compared against `analytic`.
template <typename Tensor>
double check_tensor(Tensor& param, const Tensor& analytic, const std::function<double()>& loss) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    double& p = param.data()[i];
    const double saved = p;
    p = saved + kStep;
    const double up = loss();
    p = saved - kStep;
    const double down = loss();
    p = saved;
    worst = std::max(worst, relative_error(analytic.data()[i], (up - down) / (2.0 * kStep)));
  }
  return worst;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

Eigen::VectorXd random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
  return random_matrix(n, 1, rng, scale);
}

Eigen::Index dim(Rng& rng, Eigen::Index lo, Eigen::Index hi) {
  return lo + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

nn::RecurrentCellParams random_cell(nn::CellKind kind, Eigen::Index in, Eigen::Index hidden, Rng& rng) {
  const Eigen::Index rows = nn::RecurrentCellParams::gates(kind) * hidden;
  nn::RecurrentCellParams p;
  p.kind = kind;
  p.w_input = random_matrix(rows, in, rng, 0.8);
  p.w_hidden = random_matrix(rows, hidden, rng, 0.8);
  p.bias = random_vector(rows, rng, 0.5);
  return p;
}

}  // namespace

double gradcheck_autoencoder_layer(Rng& rng) {
  const Eigen::Index in = dim(rng, 2, 6), out = dim(rng, 1, 5), batch = dim(rng, 1, 4);
  nn::DenseLayer enc{random_matrix(out, in, rng), random_vector(out, rng, 0.5), nn::Activation::Sigmoid};
  nn::DenseLayer dec{random_matrix(in, out, rng), random_vector(in, rng, 0.5), nn::Activation::Sigmoid};
  const Eigen::MatrixXd data = (random_matrix(in, batch, rng).array() + 1.0) / 2.0;

  nn::DenseGrad g_enc(enc), g_dec(dec);
  nn::reconstruction_grad(enc, dec, data, g_enc, g_dec);
  const auto loss = [&] { return nn::reconstruction_mse(enc, dec, data); };
  return std::max({check_tensor(enc.weights, g_enc.weights, loss), check_tensor(enc.bias, g_enc.bias, loss),
                   check_tensor(dec.weights, g_dec.weights, loss), check_tensor(dec.bias, g_dec.bias, loss)});
}

double gradcheck_recurrent(nn::CellKind kind, Rng& rng) {
  const Eigen::Index in = dim(rng, 2, 4), hidden = dim(rng, 2, 4);
  const auto steps = static_cast<std::size_t>(dim(rng, 2, 4));
  auto params = random_cell(kind, in, hidden, rng);
  std::vector<Eigen::VectorXd> seq;
  for (std::size_t t = 0; t < steps; ++t) seq.push_back(random_vector(in, rng));
  Eigen::VectorXd h0 = random_vector(hidden, rng, 0.5);
  // Loss reads every hidden state through fixed random weights.
  std::vector<Eigen::VectorXd> weights;
  for (std::size_t t = 0; t < steps; ++t) weights.push_back(random_vector(hidden, rng));

  const auto loss = [&] {
    const auto trace = nn::recurrent_forward(params, seq, h0);
    double l = 0.0;
    for (std::size_t t = 0; t < steps; ++t) l += weights[t].dot(trace.hidden[t + 1]);
    return l;
  };

  const auto trace = nn::recurrent_forward(params, seq, h0);
  nn::RecurrentGrad grad(params);
  std::vector<Eigen::VectorXd> d_inputs;
  Eigen::VectorXd d_h0;
  nn::recurrent_backward(params, trace, weights, grad, &d_inputs, &d_h0);

  double worst = std::max({check_tensor(params.w_input, grad.w_input, loss),
                           check_tensor(params.w_hidden, grad.w_hidden, loss), check_tensor(params.bias, grad.bias, loss),
                           check_tensor(h0, d_h0, loss)});
  for (std::size_t t = 0; t < steps; ++t) worst = std::max(worst, check_tensor(seq[t], d_inputs[t], loss));
  return worst;
}

double gradcheck_output_head(Rng& rng) {
  const Eigen::Index hidden = dim(rng, 1, 8), batch = dim(rng, 1, 4);
  nn::DenseLayer head{random_matrix(1, hidden, rng), random_vector(1, rng), nn::Activation::Identity};
  Eigen::MatrixXd inputs = random_matrix(hidden, batch, rng);
  const Eigen::MatrixXd targets = random_matrix(1, batch, rng);
  const auto loss = [&] { return (head.forward(inputs) - targets).squaredNorm(); };

  const Eigen::MatrixXd out = head.forward(inputs);
  nn::DenseGrad grad(head);
  const Eigen::MatrixXd d_inputs = nn::backward(head, inputs, out, 2.0 * (out - targets), grad);
  return std::max({check_tensor(head.weights, grad.weights, loss), check_tensor(head.bias, grad.bias, loss),
                   check_tensor(inputs, d_inputs, loss)});
}

double gradcheck_predictor(nn::CellKind kind, Rng& rng) {
  const Eigen::Index in = dim(rng, 2, 4), hidden = dim(rng, 2, 5);
  const auto steps = static_cast<std::size_t>(dim(rng, 2, 5));
  nn::PredictorWeights w{random_cell(kind, in, hidden, rng),
                         nn::DenseLayer{random_matrix(1, hidden, rng), random_vector(1, rng), nn::Activation::Identity}};
  std::vector<Eigen::VectorXd> seq;
  for (std::size_t t = 0; t < steps; ++t) seq.push_back(random_vector(in, rng));
  const double target = rng.uniform(-1.0, 1.0);

  nn::RecurrentGrad cell_grad(w.cell);
  nn::DenseGrad head_grad(w.head);
  nn::accumulate_sample_grad(w, seq, target, 1.0, cell_grad, head_grad);
  const auto loss = [&] {
    nn::RecurrentGrad cg(w.cell);
    nn::DenseGrad hg(w.head);
    return nn::accumulate_sample_grad(w, seq, target, 0.0, cg, hg);
  };
  return std::max({check_tensor(w.cell.w_input, cell_grad.w_input, loss),
                   check_tensor(w.cell.w_hidden, cell_grad.w_hidden, loss),
                   check_tensor(w.cell.bias, cell_grad.bias, loss), check_tensor(w.head.weights, head_grad.weights, loss),
                   check_tensor(w.head.bias, head_grad.bias, loss)});
}

}  // namespace epf::testing
