#pragma once

#include <span>
#include <vector>

namespace epf {

/// Natural cubic spline (zero second derivative at both knots ends).
/// Knots must be strictly increasing; two knots degrade to a line.
class NaturalSpline {
 public:
  NaturalSpline(std::span<const double> x, std::span<const double> y);

  double operator()(double t) const;

  /// Evaluates at t = 0, 1, ..., n-1 in a single forward pass.
  void sample(std::span<double> out) const;

 private:
  double eval_segment(std::size_t seg, double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace epf
