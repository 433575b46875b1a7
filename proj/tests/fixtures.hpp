#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "satstack/saturation.hpp"

namespace satstack::testing {

/// The S(2) reference saturation with constants (2, 1, 2, 1): identity on
/// [0, 1], two quartic blend pieces, plateau 2 beyond r = 2.
inline SaturationFunction reference_quartic() {
  SaturationConstants c;
  c.level = 2.0;
  c.linear_end = 1.0;
  c.flat_start = 2.0;
  c.slope = 1.0;
  c.order = 2;
  std::vector<PolynomialPiece> pieces;
  pieces.push_back({0.0, 1.0, Polynomial({0.0, 1.0})});
  pieces.push_back({1.0, 1.5, Polynomial({-4.0, 15.0, -18.0, 10.0, -2.0})});
  pieces.push_back({1.5, 2.0, Polynomial({50.0, -120.0, 108.0, -42.0, 6.0})});
  return load_explicit_saturation(c, pieces);
}

/// Dense-sampling supremum oracle, independent of the critical-point path.
inline double sampled_sup(const std::function<double(double)>& f, double lo, double hi,
                          int samples = 1000000) {
  double best = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double r = lo + (hi - lo) * i / samples;
    best = std::max(best, std::abs(f(r)));
  }
  return best;
}

inline double sampled_max(const std::function<double(double)>& f, double lo, double hi,
                          int samples = 1000000) {
  double best = -1e300;
  for (int i = 0; i <= samples; ++i) {
    const double r = lo + (hi - lo) * i / samples;
    best = std::max(best, f(r));
  }
  return best;
}

inline double sampled_min(const std::function<double(double)>& f, double lo, double hi,
                          int samples = 1000000) {
  double best = 1e300;
  for (int i = 0; i <= samples; ++i) {
    const double r = lo + (hi - lo) * i / samples;
    best = std::min(best, f(r));
  }
  return best;
}

/// 4th-order central finite difference of order-j derivatives obtained by
/// applying the 5-point first-derivative stencil j times.
inline double central_derivative(const std::function<double(double)>& f, double t, int j,
                                 double h) {
  if (j == 0) return f(t);
  auto lower = [&](double s) { return central_derivative(f, s, j - 1, h); };
  return (lower(t - 2 * h) - 8.0 * lower(t - h) + 8.0 * lower(t + h) - lower(t + 2 * h)) /
         (12.0 * h);
}

} // namespace satstack::testing
