#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satstack/synthesis.hpp"

namespace satstack {

enum class DerivativeMethod { Analytic, FiniteDifference, Both };

struct SimConfig {
  double step = 0.0;              // <= 0 picks 0.01 / alpha of the outer link
  double horizon = 400.0;
  double settle_tolerance = 1e-3; // state norm that counts as settled
  DerivativeMethod method = DerivativeMethod::Both;

  double effective_step(double alpha_outer) const;
};

struct FdCrossCheck {
  double max_rel_all = 0.0;    // over every interior grid point
  double max_rel_smooth = 0.0; // points whose stencil avoids knot crossings
  std::size_t smooth_points = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;      // [step][n]
  std::vector<double> u;                        // control samples
  std::vector<std::vector<double>> u_derivs;    // [j-1][step], analytic path
  std::vector<std::vector<double>> u_derivs_fd; // same shape, finite differences
  std::vector<std::vector<double>> nested_args; // [step][n] chain arguments z_i
  FdCrossCheck fd_check;
};

struct VerificationReport {
  std::vector<double> sup_abs;      // [0] = sup|u|, [j] = sup|u^(j)|
  std::vector<bool> budget_pass;    // vs R_0..R_p
  std::vector<bool> bound_sound;    // [j-1]: sup|u^(j)| <= u_bound[j] * (1 + 1e-6)
  std::optional<double> settle_time;
  std::optional<double> linear_region_entry;
  bool all_budgets_pass() const;
};

/// Fixed-step classical RK4 on the closed loop; records state, control and
/// nested arguments per grid point. Aborts on non-finite state (bug signal,
/// the saturated right-hand side cannot blow up).
Trajectory integrate_closed_loop(const NestedFeedbackLaw& law, std::span<const double> x0,
                                 const SimConfig& cfg);

/// Exact control derivatives up to order p, propagated layer by layer through
/// the nested structure, plus (optionally) the finite-difference path and the
/// cross-check between the two.
void control_derivatives_along(Trajectory& traj, const NestedFeedbackLaw& law, int p,
                               DerivativeMethod method);

/// Grid suprema (with parabolic peak refinement for the derivatives), budget
/// verdicts, soundness vs the a-priori tables, settle and linear-entry times.
VerificationReport verify_p_bounded(const Trajectory& traj, const NestedFeedbackLaw& law,
                                    double settle_tolerance = 1e-3);

/// First grid time after which every nested argument stays within its
/// linearity width for the rest of the horizon.
std::optional<double> verify_linear_region_entry(const Trajectory& traj,
                                                 const NestedFeedbackLaw& law);

enum class CounterexampleScenario { LinearCombination, HarmonicOscillator };

struct GrowthRow {
  double scale = 0.0;
  double udot0 = 0.0;          // |du/dt| at t = 0
  double sup_udot = 0.0;       // over the horizon
  double contrast_sup_udot = 0.0; // nested law on the same initial condition
};

struct GrowthReport {
  CounterexampleScenario scenario{};
  std::vector<GrowthRow> rows;
  double contrast_bound = 0.0; // order-1 bound of the nested contrast law
};

/// Simulates the scenario over a ladder of initial-condition scales and
/// reports the measured first-derivative peaks; the contrast column runs a
/// synthesized nested law from the same initial conditions.
GrowthReport run_counterexample(CounterexampleScenario scenario, std::span<const double> scales,
                                const SimConfig& cfg);

} // namespace satstack
