#pragma once

#include <span>
#include <vector>

#include "satstack/polynomial.hpp"
#include "satstack/saturation.hpp"

namespace satstack {

/// Initial-condition-independent bound tables for one saturation chain.
/// Arrays are 1-based in both indices (index 0 unused): Y[i][j] bounds the
/// j-th derivative of the i-th transformed state, Z[i][j] the nested argument,
/// G[q][j] the Bell aggregates of the outermost argument, and u_bound[j] the
/// resulting control-derivative bound sum_q G[q][j] * outer_deriv_sup[q].
struct BoundTables {
  int n = 0;
  int p = 0;
  std::vector<std::vector<double>> Y;
  std::vector<std::vector<double>> Z;
  std::vector<std::vector<double>> G;
  std::vector<double> u_bound;
};

/// One application of the composition estimate: ambient bound plus
/// sum_a sat_deriv_sups[a-1] * B_{k,a}(arg_bounds). k = arg_bounds.size().
double composed_derivative_bound(double ambient, std::span<const double> arg_bounds,
                                 std::span<const double> sat_deriv_sups);

/// Fills the recursion from the chain analyses (inner links first, outermost
/// last). Each analysis must carry deriv_sup up to order p; context_prev_max
/// has to match the preceding link's plateau.
BoundTables compute_bound_tables(std::span<const SaturationAnalysis> chain, int p);

/// Control-derivative bound of one order as a function of the outer linearity
/// width lambda: bound(lambda) = w * P(w) with w = 1/lambda and P a polynomial
/// with nonnegative coefficients. The clamp inside the outer secant slack is a
/// min of two branches; when the branch can switch on lambda >= 1 both
/// polynomials are kept and eval() picks by the stored switch point.
struct LambdaBoundPolynomial {
  int order = 0;
  Polynomial clamp_branch;  // active for w >= switch_w (always, when switch_w <= 0)
  Polynomial secant_branch; // active for w < switch_w
  double switch_w = 0.0;

  double eval(double lambda) const;
  /// Coefficients of the branch that governs lambda >= 1 in the common case.
  const Polynomial& primary() const { return clamp_branch; }
};

/// One polynomial per order j = 1..p. `inner` holds the lambda-free analyses
/// of the n-1 inner links; `outer_unit` is the analysis of the outermost
/// saturation normalized to linear_end = 1 (its plateau is the amplitude
/// budget).
std::vector<LambdaBoundPolynomial> lambda_bound_polynomials(
    std::span<const SaturationAnalysis> inner, const SaturationAnalysis& outer_unit, int p);

} // namespace satstack
