#include "epf/spline.hpp"

#include <algorithm>
#include <cassert>

#include "epf/error.hpp"

namespace epf {

NaturalSpline::NaturalSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw NumericError("spline needs at least two knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw NumericError("spline knots must be strictly increasing");
  }
  if (n == 2) return;

  // Tridiagonal system for interior second derivatives (Thomas algorithm).
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double h0 = x_[i + 1] - x_[i];
    const double h1 = x_[i + 2] - x_[i + 1];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y_[i + 2] - y_[i + 1]) / h1 - (y_[i + 1] - y_[i]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x_[i + 1] - x_[i];
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) {
    m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
  }
}

double NaturalSpline::eval_segment(std::size_t seg, double t) const {
  const double h = x_[seg + 1] - x_[seg];
  const double a = (x_[seg + 1] - t) / h;
  const double b = (t - x_[seg]) / h;
  return a * y_[seg] + b * y_[seg + 1] + ((a * a * a - a) * m_[seg] + (b * b * b - b) * m_[seg + 1]) * (h * h) / 6.0;
}

double NaturalSpline::operator()(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t seg = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  seg = std::min(seg, x_.size() - 2);
  return eval_segment(seg, t);
}

void NaturalSpline::sample(std::span<double> out) const {
  std::size_t seg = 0;
  const std::size_t last = x_.size() - 2;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i);
    while (seg < last && t >= x_[seg + 1]) ++seg;
    out[i] = eval_segment(seg, t);
  }
}

}  // namespace epf
