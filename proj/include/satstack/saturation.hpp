#pragma once

#include <string>
#include <vector>

#include "satstack/polynomial.hpp"

namespace satstack {

/// Shape constants of a saturation: level is the plateau value, slope the
/// linear-zone gain on [-linear_end, linear_end], flat_start the radius beyond
/// which the function is exactly +/- level, order the certified smoothness.
struct SaturationConstants {
  double level = 0.0;       // sigma_max
  double linear_end = 0.0;  // L
  double flat_start = 0.0;  // S
  double slope = 0.0;       // alpha
  int order = 0;            // p

  void validate() const; // throws std::invalid_argument on violation
};

struct PolynomialPiece {
  double lo = 0.0;
  double hi = 0.0;
  Polynomial poly;
};

/// Odd, piecewise-polynomial saturation. Only the pieces on [0, flat_start]
/// are stored; negative arguments use odd symmetry and the flat tail is
/// analytic, so those invariants hold by construction.
class SaturationFunction {
public:
  const SaturationConstants& constants() const { return constants_; }
  const std::vector<PolynomialPiece>& pieces() const { return pieces_; }

  /// j-th derivative at r, exact for the stored pieces; j = 0 is the value.
  /// j must not exceed constants().order.
  double eval(double r, int j = 0) const;
  double value(double r) const { return eval(r, 0); }

  /// Piece boundaries in (0, flat_start], ascending (derivatives above the
  /// smoothness order may jump there).
  std::vector<double> knots() const;

  /// Escape hatch for building a function without validation (tests, IO).
  static SaturationFunction from_pieces_unchecked(SaturationConstants constants,
                                                  std::vector<PolynomialPiece> pieces);

private:
  SaturationConstants constants_;
  std::vector<PolynomialPiece> pieces_;
};

struct SpCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;    // mismatch / margin magnitude
  double location = 0.0; // argument where the worst case occurred
  std::string detail;
};

struct SpValidation {
  std::vector<SpCheck> checks;
  bool all_pass = true;
  std::string first_failure() const;
};

/// Class-membership audit: sign condition, linear zone, plateau, odd-extension
/// smoothness at r = 0, and one-sided derivative matching up to the claimed
/// order at every knot.
SpValidation validate_Sp(const SaturationConstants& constants,
                         const std::vector<PolynomialPiece>& pieces, double tol);
SpValidation validate_Sp(const SaturationFunction& f, double tol);

/// Builds the linear zone plus a single two-point Hermite blend of degree
/// 2*order+1 on [linear_end, flat_start]. Rejects parameter sets for which the
/// blend is not monotone (enlarging flat_start - linear_end fixes that).
SaturationFunction make_smooth_saturation(int order, const SaturationConstants& constants);

/// Wraps explicit pieces on [0, flat_start]; throws with the failing check if
/// the class audit does not pass at tolerance tol.
SaturationFunction load_explicit_saturation(SaturationConstants constants,
                                            std::vector<PolynomialPiece> pieces,
                                            double tol = 1e-9);

/// Global supremum of |f^(j)| over the real line, per-piece via critical
/// points of the next derivative.
double derivative_sup(const SaturationFunction& f, int j);

/// max |r - f(r)| over |r| <= flat_start + 2*prev_max. Meaningful for
/// slope-one chain links; computed for any slope.
double linear_gap_bound(const SaturationFunction& f, double prev_max);

struct SecantBounds {
  double sup = 0.0;     // max f(r)/r on 0 < |r| <= flat_start (slope at r -> 0)
  double inf = 0.0;     // min of the same ratio
  double inf_clamped = 0.0; // min(inf, level / (flat_start + 2*prev_max))
};

SecantBounds secant_bounds(const SaturationFunction& f, double prev_max);

/// Value/argument rescaling: g(s) = (new_level/level) * f(s * linear_end/new_linear_end).
/// Pieces are rescaled exactly; the constants transform accordingly.
SaturationFunction rescale(const SaturationFunction& base, double new_level,
                           double new_linear_end);

/// Derived scalars of one saturation in its chain position (prev_max is the
/// plateau of the preceding link, 0 for the first).
struct SaturationAnalysis {
  SaturationConstants constants;
  std::vector<double> deriv_sup; // deriv_sup[j-1] = sup |f^(j)|, j = 1..p
  double linear_gap = 0.0;
  double secant_sup = 0.0;
  double secant_inf = 0.0;
  double secant_inf_clamped = 0.0;
  double context_prev_max = 0.0;
};

SaturationAnalysis analyze(const SaturationFunction& f, double prev_max, int p);

} // namespace satstack
