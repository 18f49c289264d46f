#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace epf {

/// Intrinsic mode functions, highest frequency first, plus the final residue.
/// imfs[k-1] is the k-th IMF; all vectors share the source length.
struct Decomposition {
  std::vector<std::vector<double>> imfs;
  std::vector<double> residue;

  std::size_t size() const { return imfs.size(); }

  /// Sum of all IMFs and the residue.
  std::vector<double> reconstruct() const;
};

struct SiftSettings {
  // Cauchy-type stop: sum((h_prev - h)^2) / sum(h_prev^2) below this.
  double sd_threshold = 0.2;
  int max_iterations = 50;
  // Mean envelope counts as "near zero" below this fraction of the input std.
  double mean_envelope_tolerance = 0.05;
  // Extrema mirrored past each end before spline fitting.
  int boundary_extrema = 2;
};

struct SiftResult {
  std::vector<double> imf;
  std::vector<double> remainder;
  int iterations = 0;
};

struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

/// Local extrema; flat plateaus report their midpoint.
Extrema find_extrema(std::span<const double> signal);
std::size_t count_zero_crossings(std::span<const double> signal);

/// Upper/lower natural-spline envelope mean with mirrored boundaries.
/// Returns nullopt when either envelope has fewer than two knots.
std::optional<std::vector<double>> mean_envelope(std::span<const double> signal, const Extrema& extrema,
                                                 int boundary_extrema);

/// Extracts the first IMF by sifting. Returns nullopt when the signal has
/// fewer than two maxima or two minima (a monotone component the caller
/// should treat as residue). remainder is signal - imf, and imf is then
/// re-derived as signal - remainder so the pair sums back to the signal.
std::optional<SiftResult> sift_imf(std::span<const double> signal, const SiftSettings& settings = {});

/// Repeated sifting until the remainder is not siftable or max_imfs is hit.
/// Requires at least 8 samples.
Decomposition emd_decompose(std::span<const double> signal, std::size_t max_imfs,
                            const SiftSettings& settings = {});

/// floor(log2(n)) - 1, at least 1.
std::size_t default_max_imfs(std::size_t n);

struct CeemdanConfig {
  std::size_t ensemble_size = 100;
  // Stage-k noise amplitude is noise_scale * std(r_k), with r_0 the input.
  double noise_scale = 0.2;
  std::uint64_t rng_seed = 0;
  // 0 selects default_max_imfs(n).
  std::size_t max_imfs = 0;
  SiftSettings sift;
  // Worker threads for the ensemble; 0 = hardware concurrency. Output does
  // not depend on this value.
  unsigned threads = 0;

  void validate() const;
};

/// Complete ensemble EMD with adaptive noise. Deterministic for a fixed
/// rng_seed regardless of thread count.
Decomposition ceemdan_decompose(std::span<const double> signal, const CeemdanConfig& config);

/// One column per IMF, then the residue; comma separated with a header row.
void write_decomposition(const std::filesystem::path& path, const Decomposition& decomposition);

}  // namespace epf
