#include "epf/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "epf/error.hpp"

namespace epf {
namespace {

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::size_t factorial(std::size_t n) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

void PeConfig::validate() const {
  if (order < 2 || order > 7) throw ConfigError("pe.order: must be in [2, 7]");
  if (delay < 1) throw ConfigError("pe.delay: must be >= 1");
}

double permutation_entropy(std::span<const double> signal, const PeConfig& config) {
  config.validate();
  const std::size_t m = config.order;
  const std::size_t tau = config.delay;
  if (signal.size() < m * tau + 1) {
    throw DataError("signal too short for permutation entropy: need " + std::to_string(m * tau + 1) + " samples");
  }
  const std::size_t windows = signal.size() - (m - 1) * tau;
  std::vector<std::size_t> counts(factorial(m), 0);
  std::vector<std::size_t> order(m);

  for (std::size_t start = 0; start < windows; ++start) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return signal[start + a * tau] < signal[start + b * tau];
    });
    // Lehmer code of the ordering permutation.
    std::size_t code = 0;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t smaller = 0;
      for (std::size_t j = i + 1; j < m; ++j) smaller += order[j] < order[i];
      code = code * (m - i) + smaller;
    }
    ++counts[code];
  }

  double entropy = 0.0;
  const double total = static_cast<double>(windows);
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    entropy -= p * std::log(p);
  }
  if (config.normalize) entropy /= std::log(static_cast<double>(counts.size()));
  return std::clamp(entropy, 0.0, config.normalize ? 1.0 : entropy);
}

Partition partition_by_pe(std::span<const double> pe_values, double threshold) {
  Partition p;
  p.pe_values.assign(pe_values.begin(), pe_values.end());
  const auto first = std::find_if(pe_values.begin(), pe_values.end(), [&](double v) { return v < threshold; });
  p.first_clean = static_cast<std::size_t>(first - pe_values.begin()) + 1;
  p.non_contiguous = std::any_of(first, pe_values.end(), [&](double v) { return v >= threshold; });
  if (p.non_contiguous) {
    spdlog::warn("PE re-exceeds threshold {} after IMF {}; keeping first-crossing partition", threshold,
                 p.first_clean);
  }
  return p;
}

Partition partition_imfs(const Decomposition& decomposition, const PeConfig& pe, double threshold) {
  if (decomposition.imfs.empty()) throw DataError("partition needs at least one IMF");
  std::vector<double> values;
  values.reserve(decomposition.imfs.size());
  for (const auto& imf : decomposition.imfs) values.push_back(permutation_entropy(imf, pe));
  return partition_by_pe(values, threshold);
}

double robust_sigma(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  const double med = median(v);
  for (auto& x : v) x = std::abs(x - med);
  return median(std::move(v)) / 0.6745;
}

double adaptive_lambda(double sigma, std::size_t series_length, std::size_t imf_index) {
  if (series_length < 2) throw DataError("adaptive threshold needs series length >= 2");
  if (imf_index < 1) throw DataError("IMF index is 1-based");
  if (!(sigma > 0.0)) return 0.0;
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(series_length)) /
                           std::log(static_cast<double>(imf_index) + 1.0));
}

double adaptive_lambda(std::span<const double> imf, std::size_t imf_index) {
  return adaptive_lambda(robust_sigma(imf), imf.size(), imf_index);
}

std::vector<double> soft_threshold(std::span<const double> imf, double lambda) {
  if (lambda < 0.0) throw DataError("threshold must be non-negative");
  std::vector<double> out(imf.size());
  for (std::size_t i = 0; i < imf.size(); ++i) {
    const double w = imf[i];
    const double mag = std::abs(w);
    out[i] = mag >= lambda ? std::copysign(mag - lambda, w) : 0.0;
  }
  return out;
}

std::vector<double> reconstruct(const Decomposition& d, std::size_t first_clean,
                                std::span<const std::vector<double>> denoised_noisy) {
  if (first_clean < 1 || first_clean > d.imfs.size() + 1) {
    throw DataError("partition index " + std::to_string(first_clean) + " out of range for " +
                    std::to_string(d.imfs.size()) + " IMFs");
  }
  if (denoised_noisy.size() != first_clean - 1) {
    throw DataError("expected " + std::to_string(first_clean - 1) + " denoised IMFs, got " +
                    std::to_string(denoised_noisy.size()));
  }
  std::vector<double> out = d.residue;
  for (std::size_t k = 0; k < d.imfs.size(); ++k) {
    const auto& component = k + 1 < first_clean ? denoised_noisy[k] : d.imfs[k];
    if (component.size() != out.size()) throw DataError("IMF length mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += component[i];
  }
  return out;
}

DenoiseResult denoise_series(const TimeSeries& series, const CeemdanConfig& ceemdan, const PeConfig& pe,
                             double pe_threshold) {
  validate(series);
  pe.validate();

  DenoiseResult result;
  result.decomposition = ceemdan_decompose(series.values, ceemdan);
  const Decomposition& d = result.decomposition;

  DenoiseReport& report = result.report;
  report.imf_count = d.imfs.size();
  report.pe_threshold = pe_threshold;
  result.series = series;

  if (d.imfs.empty()) {
    report.first_clean = 1;
    report.notes.push_back("no IMFs extracted; series passed through unchanged");
    report.denoised = result.series;
    return result;
  }

  const Partition partition = partition_imfs(d, pe, pe_threshold);
  report.pe_values = partition.pe_values;
  report.first_clean = partition.first_clean;
  report.non_contiguous = partition.non_contiguous;
  if (partition.non_contiguous) {
    report.notes.push_back("PE rises above the threshold again after the first clean IMF");
  }

  std::vector<std::vector<double>> thresholded;
  for (std::size_t k = 1; k < partition.first_clean; ++k) {
    const auto& imf = d.imfs[k - 1];
    const double sigma = robust_sigma(imf);
    const double lambda = adaptive_lambda(sigma, series.size(), k);
    report.sigmas.push_back(sigma);
    report.lambdas.push_back(lambda);
    thresholded.push_back(soft_threshold(imf, lambda));
  }
  result.series.values = reconstruct(d, partition.first_clean, thresholded);
  report.denoised = result.series;
  return result;
}

std::string report_to_json(const DenoiseReport& r) {
  nlohmann::ordered_json j;
  j["imf_count"] = r.imf_count;
  j["pe_threshold"] = r.pe_threshold;
  j["first_clean_imf"] = r.first_clean;
  j["noisy_imfs"] = r.first_clean - 1;
  auto imfs = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.pe_values.size(); ++k) {
    nlohmann::ordered_json e;
    e["index"] = k + 1;
    e["permutation_entropy"] = r.pe_values[k];
    e["noisy"] = k + 1 < r.first_clean;
    if (k < r.lambdas.size()) {
      e["sigma"] = r.sigmas[k];
      e["lambda"] = r.lambdas[k];
    }
    imfs.push_back(std::move(e));
  }
  j["imfs"] = std::move(imfs);
  j["non_contiguous"] = r.non_contiguous;
  j["notes"] = r.notes;
  j["length"] = r.denoised.size();
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const DenoiseReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << report_to_json(report);
}

}  // namespace epf
