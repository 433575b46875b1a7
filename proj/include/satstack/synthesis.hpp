#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satstack/bounds.hpp"
#include "satstack/saturation.hpp"

namespace satstack {

enum class LambdaPolicy {
  PerOrder, // each order-j bound compared to its own budget R_j
  Paper     // every bound compared to min_j R_j
};

struct SynthesisConfig {
  int n = 0;
  int p = 0;
  std::vector<double> budgets;                // R_0..R_p
  std::vector<SaturationFunction> saturations; // sigma_1..sigma_n
  double safety_factor = 0.8;                 // fraction of each strict inequality
  LambdaPolicy policy = LambdaPolicy::PerOrder;
  std::optional<std::vector<double>> inner_levels;      // mu_i^max, i = 1..n-1
  std::optional<std::vector<double>> inner_linear_ends; // L_{mu_i}, i = 1..n-1
  std::optional<double> fixed_lambda;         // skip selection, validate feasibility

  void validate() const; // throws std::invalid_argument naming the condition
};

struct InnerConstants {
  std::vector<double> levels;      // mu_i^max
  std::vector<double> linear_ends; // L_{mu_i}
};

/// Plateaus and linearity widths of the inner chain links: the last level is
/// safety_factor/2, each earlier one safety_factor/2 of the next width, and
/// every width follows the slope-one rescaling rule.
InnerConstants choose_inner_constants(const SynthesisConfig& config);

/// y = H x maps the integrator chain onto the cascade form in which each rate
/// is alpha times the tail sum plus the input. H is the binomial matrix in
/// alpha; its inverse is the same matrix in -alpha.
struct CoordinateChange {
  int n = 0;
  double alpha = 0.0;
  std::vector<std::vector<double>> H;
  std::vector<std::vector<double>> H_inv;

  std::vector<double> to_cascade(std::span<const double> x) const;   // y = H x
  std::vector<double> from_cascade(std::span<const double> y) const; // x = H^-1 y
};

CoordinateChange coordinate_change(int n, double alpha);

struct StabilityCheck {
  int link = 0;           // i in 1..n-1
  bool slope_one = false; // alpha_{mu_i} == 1
  double slope = 0.0;
  double margin = 0.0;    // L_{mu_{i+1}}/2 - mu_i^max, must be positive
  bool pass = false;
};

struct StabilityReport {
  std::vector<StabilityCheck> checks;
  bool all_pass = true;
  std::string first_failure() const;
};

/// Slope-one and half-width conditions along the internal chain.
StabilityReport validate_stability_conditions(std::span<const SaturationFunction> mu_chain);

struct NestedFeedbackLaw {
  int n = 0;
  int p = 0;
  double lambda = 1.0;
  double amplitude_bound = 0.0; // a_n * level of sigma_n = R_0
  std::vector<double> gains;    // a_1..a_n
  std::vector<std::vector<double>> k_rows; // k_1..k_n as rows acting on x
  std::vector<SaturationFunction> saturations; // sigma_1..sigma_n
  std::vector<SaturationFunction> mu_chain;    // mu_1..mu_n
  CoordinateChange coords;
  std::vector<double> budgets;  // R_0..R_p
  BoundTables tables;           // at the synthesized lambda
};

/// Smallest lambda >= 1 whose per-order bounds meet the policy targets
/// (doubling bracket, then bisection to 1e-6). p = 0 returns 1.
double select_lambda(std::span<const LambdaBoundPolynomial> bounds,
                     std::span<const double> budgets, LambdaPolicy policy);

/// The end-to-end constructive procedure: inner constants, lambda, gains and
/// row vectors, coordinate change, bound tables, stability audit.
NestedFeedbackLaw assemble_feedback(const SynthesisConfig& config);

/// Nested evaluation, innermost first.
double eval_feedback(const NestedFeedbackLaw& law, std::span<const double> x);

struct FeedbackDiagnostics {
  double u = 0.0;
  std::vector<double> nested_args; // z_1..z_n in chain coordinates
};

FeedbackDiagnostics eval_feedback_diag(const NestedFeedbackLaw& law, std::span<const double> x);

/// Same function through the other factorization: -mu_n(y_n + mu_{n-1}(...))
/// with y = H x. Used to cross-check the gain/row assembly.
double eval_feedback_cascade(const NestedFeedbackLaw& law, std::span<const double> x);

} // namespace satstack
