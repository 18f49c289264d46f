#include "epf/emd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "epf/error.hpp"
#include "epf/spline.hpp"

namespace epf {
namespace {

double stddev(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / n);
}

struct Knots {
  std::vector<double> t;
  std::vector<double> v;
};

// Envelope knots for one family of extrema, with mirrored copies of up to
// `nb` extrema past each end. `left`/`right` hold source indices in the
// order they appear after reflection; `lsym`/`rsym` are the mirror axes.
Knots assemble(std::span<const double> x, std::span<const std::size_t> left, double lsym,
               std::span<const std::size_t> interior, std::span<const std::size_t> right, double rsym) {
  Knots k;
  const std::size_t total = left.size() + interior.size() + right.size();
  k.t.reserve(total);
  k.v.reserve(total);
  auto push = [&](double t, double v) {
    if (!k.t.empty() && t <= k.t.back()) return;  // keep knots strictly increasing
    k.t.push_back(t);
    k.v.push_back(v);
  };
  for (std::size_t idx : left) push(2.0 * lsym - static_cast<double>(idx), x[idx]);
  for (std::size_t idx : interior) push(static_cast<double>(idx), x[idx]);
  for (std::size_t idx : right) push(2.0 * rsym - static_cast<double>(idx), x[idx]);
  return k;
}

// Index ranges [from, to) of a vector clamped to its size, returned reversed.
std::vector<std::size_t> reversed_range(const std::vector<std::size_t>& v, std::ptrdiff_t from, std::ptrdiff_t to) {
  from = std::max<std::ptrdiff_t>(from, 0);
  to = std::min<std::ptrdiff_t>(to, static_cast<std::ptrdiff_t>(v.size()));
  std::vector<std::size_t> out;
  for (std::ptrdiff_t i = to - 1; i >= from; --i) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

std::vector<double> Decomposition::reconstruct() const {
  std::vector<double> out = residue;
  for (const auto& imf : imfs) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += imf[i];
  }
  return out;
}

Extrema find_extrema(std::span<const double> x) {
  Extrema e;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] == x[i - 1]) {
      ++i;
      continue;
    }
    // Extend across a plateau starting at i.
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 >= n) break;
    const bool rising = x[i] > x[i - 1];
    const bool falling_after = x[j + 1] < x[j];
    if (rising && falling_after) {
      e.maxima.push_back((i + j) / 2);
    } else if (!rising && !falling_after) {
      e.minima.push_back((i + j) / 2);
    }
    i = j + 1;
  }
  return e;
}

std::size_t count_zero_crossings(std::span<const double> x) {
  std::size_t count = 0;
  int last_sign = 0;
  for (double v : x) {
    const int sign = (v > 0.0) - (v < 0.0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++count;
    last_sign = sign;
  }
  return count;
}

std::optional<std::vector<double>> mean_envelope(std::span<const double> x, const Extrema& ext, int boundary_extrema) {
  const auto& imax = ext.maxima;
  const auto& imin = ext.minima;
  if (imax.size() < 2 || imin.size() < 2) return std::nullopt;

  const std::ptrdiff_t nb = std::max(1, boundary_extrema);
  const std::ptrdiff_t nmax = static_cast<std::ptrdiff_t>(imax.size());
  const std::ptrdiff_t nmin = static_cast<std::ptrdiff_t>(imin.size());
  const std::size_t last = x.size() - 1;

  // Left boundary: mirror about the first extremum, or about sample 0 when
  // the end value lies outside the first opposite extremum (the end sample
  // then joins the opposite envelope).
  std::vector<std::size_t> lmax, lmin;
  std::size_t lsym = 0;
  if (imax.front() < imin.front()) {
    if (x[0] > x[imin.front()]) {
      lmax = reversed_range(imax, 1, nb + 1);
      lmin = reversed_range(imin, 0, nb);
      lsym = imax.front();
    } else {
      lmax = reversed_range(imax, 0, nb);
      lmin = reversed_range(imin, 0, nb - 1);
      lmin.push_back(0);
    }
  } else {
    if (x[0] < x[imax.front()]) {
      lmax = reversed_range(imax, 0, nb);
      lmin = reversed_range(imin, 1, nb + 1);
      lsym = imin.front();
    } else {
      lmax = reversed_range(imax, 0, nb - 1);
      lmax.push_back(0);
      lmin = reversed_range(imin, 0, nb);
    }
  }

  std::vector<std::size_t> rmax, rmin;
  std::size_t rsym = last;
  if (imax.back() < imin.back()) {
    if (x[last] < x[imax.back()]) {
      rmax = reversed_range(imax, nmax - nb, nmax);
      rmin = reversed_range(imin, nmin - nb - 1, nmin - 1);
      rsym = imin.back();
    } else {
      rmax = reversed_range(imax, nmax - nb + 1, nmax);
      rmax.insert(rmax.begin(), last);
      rmin = reversed_range(imin, nmin - nb, nmin);
    }
  } else {
    if (x[last] > x[imin.back()]) {
      rmax = reversed_range(imax, nmax - nb - 1, nmax - 1);
      rmin = reversed_range(imin, nmin - nb, nmin);
      rsym = imax.back();
    } else {
      rmax = reversed_range(imax, nmax - nb, nmax);
      rmin = reversed_range(imin, nmin - nb + 1, nmin);
      rmin.insert(rmin.begin(), last);
    }
  }

  auto mirrored_first = [](const std::vector<std::size_t>& v, std::size_t sym) {
    return v.empty() ? -1.0 : 2.0 * static_cast<double>(sym) - static_cast<double>(v.front());
  };
  auto mirrored_last = [last](const std::vector<std::size_t>& v, std::size_t sym) {
    return v.empty() ? static_cast<double>(last) + 1.0 : 2.0 * static_cast<double>(sym) - static_cast<double>(v.back());
  };

  // If mirroring about an extremum does not reach past the end, mirror about
  // the end sample instead.
  if (lsym != 0 && (mirrored_first(lmax, lsym) > 0.0 || mirrored_first(lmin, lsym) > 0.0)) {
    if (lsym == imax.front()) {
      lmax = reversed_range(imax, 0, nb);
    } else {
      lmin = reversed_range(imin, 0, nb);
    }
    lsym = 0;
  }
  if (rsym != last &&
      (mirrored_last(rmax, rsym) < static_cast<double>(last) || mirrored_last(rmin, rsym) < static_cast<double>(last))) {
    if (rsym == imax.back()) {
      rmax = reversed_range(imax, nmax - nb, nmax);
    } else {
      rmin = reversed_range(imin, nmin - nb, nmin);
    }
    rsym = last;
  }

  const Knots upper = assemble(x, lmax, static_cast<double>(lsym), imax, rmax, static_cast<double>(rsym));
  const Knots lower = assemble(x, lmin, static_cast<double>(lsym), imin, rmin, static_cast<double>(rsym));
  if (upper.t.size() < 2 || lower.t.size() < 2) return std::nullopt;

  std::vector<double> up(x.size()), lo(x.size());
  NaturalSpline(upper.t, upper.v).sample(up);
  NaturalSpline(lower.t, lower.v).sample(lo);
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = 0.5 * (up[i] + lo[i]);
  return up;
}

std::optional<SiftResult> sift_imf(std::span<const double> signal, const SiftSettings& settings) {
  Extrema ext = find_extrema(signal);
  if (ext.maxima.size() < 2 || ext.minima.size() < 2) return std::nullopt;

  const double envelope_tol = settings.mean_envelope_tolerance * stddev(signal);
  std::vector<double> h(signal.begin(), signal.end());
  int iterations = 0;

  while (iterations < settings.max_iterations) {
    auto env = mean_envelope(h, ext, settings.boundary_extrema);
    if (!env) break;
    ++iterations;

    double diff_energy = 0.0;
    double prev_energy = 0.0;
    double env_peak = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      prev_energy += h[i] * h[i];
      diff_energy += (*env)[i] * (*env)[i];
      env_peak = std::max(env_peak, std::abs((*env)[i]));
      h[i] -= (*env)[i];
    }
    const double sd = prev_energy > 0.0 ? diff_energy / prev_energy : 0.0;

    ext = find_extrema(h);
    const auto n_extrema = static_cast<std::ptrdiff_t>(ext.maxima.size() + ext.minima.size());
    const auto n_crossings = static_cast<std::ptrdiff_t>(count_zero_crossings(h));
    const bool imf_shape = std::abs(n_extrema - n_crossings) <= 1;
    if (imf_shape && (sd < settings.sd_threshold || env_peak < envelope_tol)) break;
    if (ext.maxima.size() < 2 || ext.minima.size() < 2) break;
  }
  if (iterations == 0) return std::nullopt;

  SiftResult result;
  result.iterations = iterations;
  result.remainder.resize(h.size());
  result.imf.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    result.imf[i] = h[i];
    result.remainder[i] = signal[i] - h[i];
  }
  return result;
}

std::size_t default_max_imfs(std::size_t n) {
  if (n < 4) return 1;
  const auto log2n = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(n))));
  return std::max<std::size_t>(1, log2n - 1);
}

Decomposition emd_decompose(std::span<const double> signal, std::size_t max_imfs, const SiftSettings& settings) {
  if (signal.size() < 8) throw DataError("EMD needs at least 8 samples, got " + std::to_string(signal.size()));
  Decomposition d;
  std::vector<double> r(signal.begin(), signal.end());
  while (d.imfs.size() < max_imfs) {
    auto sifted = sift_imf(r, settings);
    if (!sifted) break;
    d.imfs.push_back(std::move(sifted->imf));
    r = std::move(sifted->remainder);
  }
  d.residue = std::move(r);
  return d;
}

void write_decomposition(const std::filesystem::path& path, const Decomposition& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (std::size_t k = 0; k < d.imfs.size(); ++k) out << "imf" << (k + 1) << ',';
  out << "residue\n";
  char buf[40];
  for (std::size_t i = 0; i < d.residue.size(); ++i) {
    for (const auto& imf : d.imfs) {
      std::snprintf(buf, sizeof buf, "%.17g,", imf[i]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", d.residue[i]);
    out << buf;
  }
}

}  // namespace epf
