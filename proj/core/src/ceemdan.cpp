#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "epf/emd.hpp"
#include "epf/error.hpp"
#include "epf/rng.hpp"
#include "parallel.hpp"

namespace epf {
namespace {

double stddev(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / n);
}

bool siftable(std::span<const double> r) {
  const Extrema e = find_extrema(r);
  return e.maxima.size() >= 2 && e.minima.size() >= 2;
}

}  // namespace

void CeemdanConfig::validate() const {
  if (ensemble_size < 1) throw ConfigError("ceemdan.ensemble_size: must be >= 1");
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) throw ConfigError("ceemdan.noise_scale: must be > 0");
  if (sift.max_iterations < 1) throw ConfigError("ceemdan.sift.max_iterations: must be >= 1");
  if (!(sift.sd_threshold > 0.0)) throw ConfigError("ceemdan.sift.sd_threshold: must be > 0");
  if (sift.boundary_extrema < 1) throw ConfigError("ceemdan.sift.boundary_extrema: must be >= 1");
}

Decomposition ceemdan_decompose(std::span<const double> signal, const CeemdanConfig& config) {
  config.validate();
  const std::size_t n = signal.size();
  if (n < 8) throw DataError("CEEMDAN needs at least 8 samples, got " + std::to_string(n));
  for (double v : signal) {
    if (!std::isfinite(v)) throw DataError("CEEMDAN input contains non-finite values");
  }

  const std::size_t max_imfs = config.max_imfs ? config.max_imfs : default_max_imfs(n);
  const std::size_t ensemble = config.ensemble_size;

  Decomposition d;
  std::vector<double> r(signal.begin(), signal.end());

  if (stddev(signal) == 0.0 || !siftable(r)) {
    d.residue = std::move(r);
    return d;
  }

  // White-noise realizations and their full EMD, computed once. Stream i is
  // seeded with rng_seed + i so the ensemble is independent of scheduling.
  std::vector<std::vector<double>> noise(ensemble);
  std::vector<std::vector<std::vector<double>>> noise_modes(ensemble);
  detail::parallel_for(ensemble, config.threads, [&](std::size_t i) {
    Rng rng(config.rng_seed + i);
    noise[i].resize(n);
    for (auto& w : noise[i]) w = rng.normal();
    noise_modes[i] = emd_decompose(noise[i], max_imfs, config.sift).imfs;
  });

  std::vector<std::vector<double>> modes(ensemble);
  std::vector<char> produced(ensemble);

  for (std::size_t stage = 0; stage < max_imfs; ++stage) {
    if (!siftable(r)) break;
    const double amplitude = config.noise_scale * stddev(r);

    detail::parallel_for(ensemble, config.threads, [&](std::size_t i) {
      // Stage 0 perturbs with the raw noise; stage k with the k-th noise mode.
      const std::vector<double>* perturbation = nullptr;
      if (stage == 0) {
        perturbation = &noise[i];
      } else if (stage <= noise_modes[i].size()) {
        perturbation = &noise_modes[i][stage - 1];
      }
      std::vector<double> x = r;
      if (perturbation) {
        for (std::size_t j = 0; j < n; ++j) x[j] += amplitude * (*perturbation)[j];
      }
      auto sifted = sift_imf(x, config.sift);
      produced[i] = sifted.has_value();
      // A realization with no mode contributes the unperturbed stage input.
      modes[i] = sifted ? std::move(sifted->imf) : r;
    });

    const auto failures = static_cast<std::size_t>(std::count(produced.begin(), produced.end(), 0));
    if (failures == ensemble) break;
    if (failures > 0) {
      spdlog::debug("ceemdan stage {}: {} of {} realizations yielded no mode", stage + 1, failures, ensemble);
    }

    // Index-ordered reduction keeps the sum independent of thread count.
    std::vector<double> imf(n, 0.0);
    for (std::size_t i = 0; i < ensemble; ++i) {
      for (std::size_t j = 0; j < n; ++j) imf[j] += modes[i][j];
    }
    const double inv = 1.0 / static_cast<double>(ensemble);
    for (auto& v : imf) v *= inv;

    for (std::size_t j = 0; j < n; ++j) r[j] -= imf[j];
    d.imfs.push_back(std::move(imf));
  }

  d.residue.assign(signal.begin(), signal.end());
  for (const auto& imf : d.imfs) {
    for (std::size_t j = 0; j < n; ++j) d.residue[j] -= imf[j];
  }
  return d;
}

}  // namespace epf
