#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "epf/neural/recurrent.hpp"
#include "epf/rng.hpp"

namespace epf::testing {

std::vector<double> sine(std::size_t n, double periods, double amplitude = 1.0, double phase = 0.0);
std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma = 1.0);
std::vector<double> add(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> x);
double stddev(std::span<const double> x);
double correlation(std::span<const double> a, std::span<const double> b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
/// 10 log10(sum clean^2 / sum (clean - x)^2)
double snr_db(std::span<const double> clean, std::span<const double> x);

/// Sine of the given period (samples) with white noise scaled to `snr` dB.
struct NoisySine {
  std::vector<double> clean;
  std::vector<double> noisy;
};
NoisySine noisy_sine(std::size_t n, double period, double snr, std::uint64_t seed);

/// |a - n| / max(|a|, |n|, floor). The floor keeps parameters with
/// vanishing gradients from dominating through finite-difference noise.
double relative_error(double analytic, double numeric, double floor = 1e-5);

/// Each check builds one random small instance from `rng`, compares every
/// analytic gradient entry with a central difference (step 1e-5) and returns
/// the largest relative error.
double gradcheck_autoencoder_layer(Rng& rng);
double gradcheck_recurrent(nn::CellKind kind, Rng& rng);
double gradcheck_output_head(Rng& rng);
/// Full predictor (cell + head) through accumulate_sample_grad.
double gradcheck_predictor(nn::CellKind kind, Rng& rng);

}  // namespace epf::testing
