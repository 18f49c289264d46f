#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "epf/emd.hpp"
#include "epf/timeseries.hpp"

namespace epf {

struct PeConfig {
  std::size_t order = 4;  // embedding dimension, 2..7
  std::size_t delay = 1;
  bool normalize = true;  // divide by ln(order!)

  void validate() const;
};

/// Shannon entropy of the ordinal-pattern distribution over all windows of
/// `order` samples spaced `delay` apart. Equal values rank by position.
/// Requires at least order * delay + 1 samples.
double permutation_entropy(std::span<const double> signal, const PeConfig& config = {});

struct Partition {
  // 1-based index of the first clean IMF; 1 means nothing to denoise and
  // K + 1 means every IMF is noisy.
  std::size_t first_clean = 1;
  std::vector<double> pe_values;
  // A later IMF rose back above the threshold after the first crossing.
  bool non_contiguous = false;
};

/// First-crossing rule: the first IMF (scanning from the highest frequency)
/// whose PE drops below `threshold` fixes the split.
Partition partition_by_pe(std::span<const double> pe_values, double threshold);
Partition partition_imfs(const Decomposition& decomposition, const PeConfig& pe, double threshold);

/// median(|w - median(w)|) / 0.6745
double robust_sigma(std::span<const double> values);

/// sigma * sqrt(2 ln(m) / ln(k + 1)) for IMF ordinal k >= 1 and series
/// length m >= 2.
double adaptive_lambda(double sigma, std::size_t series_length, std::size_t imf_index);
/// Same, with sigma estimated from the IMF by robust_sigma.
double adaptive_lambda(std::span<const double> imf, std::size_t imf_index);

/// sgn(w)(|w| - lambda) where |w| >= lambda, 0 elsewhere.
std::vector<double> soft_threshold(std::span<const double> imf, double lambda);

/// Sum of the thresholded noisy IMFs (indices 1..P-1), the untouched clean
/// IMFs (P..K) and the residue. `denoised_noisy` must hold exactly P-1 IMFs.
std::vector<double> reconstruct(const Decomposition& decomposition, std::size_t first_clean,
                                std::span<const std::vector<double>> denoised_noisy);

struct DenoiseReport {
  std::size_t imf_count = 0;
  std::vector<double> pe_values;
  std::size_t first_clean = 1;
  double pe_threshold = 0.7;
  std::vector<double> sigmas;   // one per noisy IMF
  std::vector<double> lambdas;  // one per noisy IMF
  bool non_contiguous = false;
  std::vector<std::string> notes;
  TimeSeries denoised;
};

struct DenoiseResult {
  TimeSeries series;
  DenoiseReport report;
  Decomposition decomposition;
};

/// CEEMDAN, PE partition, adaptive soft thresholding of the noisy IMFs and
/// reconstruction. The exogenous channel, if present, passes through.
DenoiseResult denoise_series(const TimeSeries& series, const CeemdanConfig& ceemdan, const PeConfig& pe,
                             double pe_threshold);

std::string report_to_json(const DenoiseReport& report);
void write_report(const std::filesystem::path& path, const DenoiseReport& report);

}  // namespace epf
