#include "satstack/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "satstack/bell.hpp"

namespace satstack {

double SimConfig::effective_step(double alpha_outer) const {
  if (step > 0.0) return step;
  return 0.01 / alpha_outer; // resolves the fastest linear dynamics
}

bool VerificationReport::all_budgets_pass() const {
  for (bool b : budget_pass)
    if (!b) return false;
  return true;
}

namespace {

using Rhs = std::function<void(std::span<const double>, std::vector<double>&)>;

void rk4_step(const Rhs& f, std::vector<double>& x, double h, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& work) {
  const std::size_t n = x.size();
  f(x, k1);
  for (std::size_t i = 0; i < n; ++i) work[i] = x[i] + 0.5 * h * k1[i];
  f(work, k2);
  for (std::size_t i = 0; i < n; ++i) work[i] = x[i] + 0.5 * h * k2[i];
  f(work, k3);
  for (std::size_t i = 0; i < n; ++i) work[i] = x[i] + h * k3[i];
  f(work, k4);
  for (std::size_t i = 0; i < n; ++i)
    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace

Trajectory integrate_closed_loop(const NestedFeedbackLaw& law, std::span<const double> x0,
                                 const SimConfig& cfg) {
  const int n = law.n;
  if (static_cast<int>(x0.size()) != n)
    throw std::invalid_argument("integrate_closed_loop: initial state dimension mismatch");
  const double h = cfg.effective_step(law.coords.alpha);
  if (!(h > 0.0) || !(cfg.horizon > 0.0))
    throw std::invalid_argument("integrate_closed_loop: step and horizon must be positive");
  const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.horizon / h));

  Rhs rhs = [&law, n](std::span<const double> x, std::vector<double>& dx) {
    for (int i = 0; i + 1 < n; ++i) dx[i] = x[i + 1];
    dx[n - 1] = eval_feedback(law, x);
  };

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.u.reserve(steps + 1);
  traj.nested_args.reserve(steps + 1);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), work(n);
  for (std::size_t step = 0; step <= steps; ++step) {
    for (double v : x)
      if (!std::isfinite(v))
        throw std::runtime_error(
            "integrate_closed_loop: non-finite state (saturated dynamics cannot diverge; "
            "this is a bug)");
    const FeedbackDiagnostics diag = eval_feedback_diag(law, x);
    traj.times.push_back(static_cast<double>(step) * h);
    traj.states.push_back(x);
    traj.u.push_back(diag.u);
    traj.nested_args.push_back(diag.nested_args);
    if (step < steps) rk4_step(rhs, x, h, k1, k2, k3, k4, work);
  }
  return traj;
}

namespace {

// Analytic propagation of the control derivatives at one grid point.
// State derivatives follow the chain structure; each nested layer feeds the
// composition formula with the exact saturation derivatives at the current
// argument.
void analytic_point(const NestedFeedbackLaw& law, const std::vector<double>& x,
                    const std::vector<double>& z, int p, std::vector<double>& ud,
                    std::vector<std::vector<double>>& zd, std::vector<double>& xm,
                    std::vector<double>& xprev, std::vector<double>& ym,
                    std::vector<double>& outer, std::vector<double>& inner) {
  const int n = law.n;
  ud[0] = -law.mu_chain[n - 1].value(z[n - 1]);
  xprev = x;
  for (int i = 0; i < n; ++i) zd[i].assign(static_cast<std::size_t>(p) + 1, 0.0);
  for (int m = 1; m <= p; ++m) {
    // x^(m) = J x^(m-1) + e_n u^(m-1)
    for (int i = 0; i + 1 < n; ++i) xm[i] = xprev[i + 1];
    xm[n - 1] = ud[m - 1];
    xprev = xm;
    // y^(m) = H x^(m)
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      for (int c = 0; c < n; ++c) acc += law.coords.H[r][c] * xm[c];
      ym[r] = acc;
    }
    zd[0][m] = ym[0];
    for (int i = 2; i <= n; ++i) {
      const auto& mu = law.mu_chain[i - 2];
      outer.resize(m);
      inner.resize(m);
      for (int a = 1; a <= m; ++a) outer[a - 1] = mu.eval(z[i - 2], a);
      for (int l = 1; l <= m; ++l) inner[l - 1] = zd[i - 2][l];
      zd[i - 1][m] = ym[i - 1] + faa_di_bruno(outer, inner);
    }
    const auto& mu_n = law.mu_chain[n - 1];
    outer.resize(m);
    inner.resize(m);
    for (int a = 1; a <= m; ++a) outer[a - 1] = mu_n.eval(z[n - 1], a);
    for (int l = 1; l <= m; ++l) inner[l - 1] = zd[n - 1][l];
    ud[m] = -faa_di_bruno(outer, inner);
  }
}

// 4th-order first-derivative stencil applied j times; edges widen by 2 per
// pass and are left as NaN.
std::vector<std::vector<double>> repeated_stencil(const std::vector<double>& u, int p, double h) {
  const std::size_t n = u.size();
  std::vector<std::vector<double>> out;
  std::vector<double> cur = u;
  for (int j = 1; j <= p; ++j) {
    std::vector<double> next(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 2; k + 2 < n; ++k) {
      const double a = cur[k - 2], b = cur[k - 1], c = cur[k + 1], d = cur[k + 2];
      if (std::isnan(a) || std::isnan(b) || std::isnan(c) || std::isnan(d)) continue;
      next[k] = (a - 8.0 * b + 8.0 * c - d) / (12.0 * h);
    }
    out.push_back(next);
    cur = next;
  }
  return out;
}

// Knot-cell index per layer: which interval of the layer's knot partition the
// magnitude of the nested argument falls in. A constant cell across a stencil
// footprint certifies the composition is polynomial-smooth there.
std::vector<std::vector<int>> knot_cells(const Trajectory& traj, const NestedFeedbackLaw& law) {
  const int n = law.n;
  std::vector<std::vector<double>> layer_knots(n);
  for (int i = 0; i < n; ++i) layer_knots[i] = law.mu_chain[i].knots();
  std::vector<std::vector<int>> cells(traj.times.size(), std::vector<int>(n, 0));
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    for (int i = 0; i < n; ++i) {
      const double mag = std::abs(traj.nested_args[k][i]);
      const auto& knots = layer_knots[i];
      cells[k][i] =
          static_cast<int>(std::upper_bound(knots.begin(), knots.end(), mag) - knots.begin());
    }
  return cells;
}

} // namespace

void control_derivatives_along(Trajectory& traj, const NestedFeedbackLaw& law, int p,
                               DerivativeMethod method) {
  if (p < 0) throw std::invalid_argument("control_derivatives_along: p < 0");
  for (const auto& mu : law.mu_chain)
    if (mu.constants().order < p)
      throw std::invalid_argument(
          "control_derivatives_along: requested order exceeds the chain smoothness");
  const std::size_t points = traj.times.size();
  const int n = law.n;

  if (method != DerivativeMethod::FiniteDifference) {
    traj.u_derivs.assign(p, std::vector<double>(points, 0.0));
    std::vector<double> ud(static_cast<std::size_t>(p) + 1, 0.0);
    std::vector<std::vector<double>> zd(n);
    std::vector<double> xm(n), xprev(n), ym(n), outer, inner;
    for (std::size_t k = 0; k < points; ++k) {
      analytic_point(law, traj.states[k], traj.nested_args[k], p, ud, zd, xm, xprev, ym, outer,
                     inner);
      for (int j = 1; j <= p; ++j) traj.u_derivs[j - 1][k] = ud[j];
    }
  }

  if (method != DerivativeMethod::Analytic && points >= 5 && p >= 1) {
    const double h = points >= 2 ? traj.times[1] - traj.times[0] : 1.0;
    traj.u_derivs_fd = repeated_stencil(traj.u, p, h);
  }

  if (method == DerivativeMethod::Both && !traj.u_derivs_fd.empty()) {
    const auto cells = knot_cells(traj, law);
    FdCrossCheck check;
    for (int j = 1; j <= p; ++j) {
      const auto& a = traj.u_derivs[j - 1];
      const auto& f = traj.u_derivs_fd[j - 1];
      double scale = 0.0;
      for (double v : a) scale = std::max(scale, std::abs(v));
      scale = std::max(scale, 1e-12);
      const std::size_t radius = 2 * static_cast<std::size_t>(j);
      for (std::size_t k = radius; k + radius < points; ++k) {
        if (std::isnan(f[k])) continue;
        const double rel = std::abs(a[k] - f[k]) / scale;
        check.max_rel_all = std::max(check.max_rel_all, rel);
        bool smooth = true;
        for (std::size_t w = k - radius; smooth && w <= k + radius; ++w)
          for (int i = 0; i < n; ++i)
            if (cells[w][i] != cells[k][i]) {
              smooth = false;
              break;
            }
        if (smooth) {
          ++check.smooth_points;
          check.max_rel_smooth = std::max(check.max_rel_smooth, rel);
        }
      }
    }
    traj.fd_check = check;
  }
}

namespace {

double refined_sup(const std::vector<double>& v) {
  double sup = 0.0;
  for (double x : v) sup = std::max(sup, std::abs(x));
  // quadratic refinement of the three largest interior peaks of |v|
  std::vector<std::pair<double, std::size_t>> peaks;
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    const double m = std::abs(v[k]);
    if (m >= std::abs(v[k - 1]) && m >= std::abs(v[k + 1])) peaks.push_back({m, k});
  }
  std::sort(peaks.rbegin(), peaks.rend());
  for (std::size_t i = 0; i < peaks.size() && i < 3; ++i) {
    const std::size_t k = peaks[i].second;
    const double lm = std::abs(v[k - 1]), m = std::abs(v[k]), rm = std::abs(v[k + 1]);
    const double denom = lm - 2.0 * m + rm;
    if (denom < -1e-300) sup = std::max(sup, m - (rm - lm) * (rm - lm) / (8.0 * denom));
  }
  return sup;
}

double state_norm(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

} // namespace

std::optional<double> verify_linear_region_entry(const Trajectory& traj,
                                                 const NestedFeedbackLaw& law) {
  const std::size_t points = traj.times.size();
  const int n = law.n;
  std::size_t first_inside = points;
  for (std::size_t k = points; k-- > 0;) {
    bool inside = true;
    for (int i = 0; i < n && inside; ++i)
      inside = std::abs(traj.nested_args[k][i]) <= law.mu_chain[i].constants().linear_end;
    if (!inside) break;
    first_inside = k;
  }
  if (first_inside == points) return std::nullopt;
  return traj.times[first_inside];
}

VerificationReport verify_p_bounded(const Trajectory& traj, const NestedFeedbackLaw& law,
                                    double settle_tolerance) {
  VerificationReport report;
  const int p = static_cast<int>(traj.u_derivs.size());
  report.sup_abs.assign(static_cast<std::size_t>(p) + 1, 0.0);
  for (double v : traj.u) report.sup_abs[0] = std::max(report.sup_abs[0], std::abs(v));
  for (int j = 1; j <= p; ++j) report.sup_abs[j] = refined_sup(traj.u_derivs[j - 1]);

  report.budget_pass.assign(report.sup_abs.size(), true);
  for (std::size_t j = 0; j < report.sup_abs.size() && j < law.budgets.size(); ++j)
    report.budget_pass[j] = report.sup_abs[j] <= law.budgets[j];

  report.bound_sound.assign(p, true);
  for (int j = 1; j <= p && j <= law.tables.p; ++j)
    report.bound_sound[j - 1] = report.sup_abs[j] <= law.tables.u_bound[j] * (1.0 + 1e-6);

  // settled means the state norm stays below the threshold for the rest of
  // the horizon, not a single dip
  std::size_t first_settled = traj.times.size();
  for (std::size_t k = traj.times.size(); k-- > 0;) {
    if (state_norm(traj.states[k]) >= settle_tolerance) break;
    first_settled = k;
  }
  if (first_settled < traj.times.size()) report.settle_time = traj.times[first_settled];
  report.linear_region_entry = verify_linear_region_entry(traj, law);
  return report;
}

namespace {

struct ScenarioTrace {
  double udot0 = 0.0;
  double sup_udot = 0.0;
};

ScenarioTrace simulate_two_state(const Rhs& rhs, const std::function<double(std::span<const double>)>& udot,
                                 std::vector<double> x, double h, double horizon) {
  const std::size_t steps = static_cast<std::size_t>(std::llround(horizon / h));
  std::vector<double> k1(2), k2(2), k3(2), k4(2), work(2);
  ScenarioTrace out;
  out.udot0 = std::abs(udot(x));
  for (std::size_t s = 0; s <= steps; ++s) {
    out.sup_udot = std::max(out.sup_udot, std::abs(udot(x)));
    if (s < steps) rk4_step(rhs, x, h, k1, k2, k3, k4, work);
  }
  return out;
}

} // namespace

GrowthReport run_counterexample(CounterexampleScenario scenario, std::span<const double> scales,
                                const SimConfig& cfg) {
  SaturationConstants sc;
  sc.level = 2.0;
  sc.linear_end = 1.0;
  sc.flat_start = 2.0;
  sc.slope = 1.0;
  sc.order = 2;
  const SaturationFunction sigma = make_smooth_saturation(2, sc);
  const double h = cfg.step > 0.0 ? cfg.step : 0.01;
  const double horizon = cfg.horizon;

  // fixed unit gains for the scenario laws
  auto linear_combination_u = [&sigma](std::span<const double> x) {
    return -sigma.value(x[1]) - sigma.value(x[0] + x[1]);
  };
  Rhs linear_combination_rhs = [&](std::span<const double> x, std::vector<double>& dx) {
    dx[0] = x[1];
    dx[1] = linear_combination_u(x);
  };
  auto linear_combination_udot = [&](std::span<const double> x) {
    const double u = linear_combination_u(x);
    return -sigma.eval(x[1], 1) * u - sigma.eval(x[0] + x[1], 1) * (x[1] + u);
  };

  auto harmonic_u = [&sigma](std::span<const double> x) { return -sigma.value(x[1]); };
  Rhs harmonic_rhs = [&](std::span<const double> x, std::vector<double>& dx) {
    dx[0] = x[1];
    dx[1] = -x[0] + harmonic_u(x);
  };
  auto harmonic_udot = [&](std::span<const double> x) {
    return -sigma.eval(x[1], 1) * (-x[0] + harmonic_u(x));
  };

  // contrast: a synthesized nested law for the double integrator
  SynthesisConfig contrast_cfg;
  contrast_cfg.n = 2;
  contrast_cfg.p = 1;
  contrast_cfg.budgets = {2.0, 1.0};
  contrast_cfg.saturations = {sigma, sigma};
  const NestedFeedbackLaw contrast = assemble_feedback(contrast_cfg);

  GrowthReport report;
  report.scenario = scenario;
  report.contrast_bound = contrast.tables.u_bound[1];

  for (double scale : scales) {
    GrowthRow row;
    row.scale = scale;
    const std::vector<double> x0 = (scenario == CounterexampleScenario::LinearCombination)
                                       ? std::vector<double>{-scale, scale}
                                       : std::vector<double>{scale, 0.0};
    if (scenario == CounterexampleScenario::LinearCombination) {
      const auto trace =
          simulate_two_state(linear_combination_rhs, linear_combination_udot, x0, h, horizon);
      row.udot0 = trace.udot0;
      row.sup_udot = trace.sup_udot;
    } else {
      const auto trace = simulate_two_state(harmonic_rhs, harmonic_udot, x0, h, horizon);
      row.udot0 = trace.udot0;
      row.sup_udot = trace.sup_udot;
    }

    SimConfig contrast_cfg_sim = cfg;
    contrast_cfg_sim.step = h;
    Trajectory traj = integrate_closed_loop(contrast, x0, contrast_cfg_sim);
    control_derivatives_along(traj, contrast, 1, DerivativeMethod::Analytic);
    for (double v : traj.u_derivs[0]) row.contrast_sup_udot = std::max(row.contrast_sup_udot, std::abs(v));
    report.rows.push_back(row);
  }
  return report;
}

} // namespace satstack
