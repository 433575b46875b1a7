#include "satstack/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace satstack {

void SynthesisConfig::validate() const {
  if (n < 1) throw std::invalid_argument("config: chain length n must be >= 1");
  if (p < 0) throw std::invalid_argument("config: derivative order p must be >= 0");
  if (static_cast<int>(budgets.size()) != p + 1)
    throw std::invalid_argument("config: budgets must list R_0..R_p (" + std::to_string(p + 1) +
                                " values)");
  for (double r : budgets)
    if (!(r > 0.0)) throw std::invalid_argument("config: every budget R_j must be positive");
  if (static_cast<int>(saturations.size()) != n)
    throw std::invalid_argument("config: need one saturation per chain position");
  for (int i = 0; i < n; ++i) {
    const auto& c = saturations[i].constants();
    if (c.order < p)
      throw std::invalid_argument("config: saturation " + std::to_string(i + 1) +
                                  " has smoothness order " + std::to_string(c.order) +
                                  " below p = " + std::to_string(p));
    const auto audit = validate_Sp(saturations[i], 1e-9);
    if (!audit.all_pass)
      throw std::invalid_argument("config: saturation " + std::to_string(i + 1) +
                                  " failed the class audit: " + audit.first_failure());
  }
  if (!(safety_factor > 0.0) || !(safety_factor < 1.0))
    throw std::invalid_argument("config: safety_factor must lie in (0, 1)");
  if (inner_levels.has_value() != inner_linear_ends.has_value())
    throw std::invalid_argument("config: inner levels and linear ends must be given together");
  if (inner_levels && static_cast<int>(inner_levels->size()) != n - 1)
    throw std::invalid_argument("config: inner overrides must list n-1 values");
  if (inner_linear_ends && static_cast<int>(inner_linear_ends->size()) != n - 1)
    throw std::invalid_argument("config: inner overrides must list n-1 values");
  if (fixed_lambda && !(*fixed_lambda >= 1.0))
    throw std::invalid_argument("config: fixed lambda must be >= 1");
}

InnerConstants choose_inner_constants(const SynthesisConfig& config) {
  InnerConstants out;
  const int n = config.n;
  if (n < 2) return out;
  out.levels.assign(n - 1, 0.0);
  out.linear_ends.assign(n - 1, 0.0);
  auto width_rule = [&](int i, double level) {
    // slope-one rescaling: L_{mu_i} = mu_i^max * L_i * alpha_i / level_i
    const auto& c = config.saturations[i - 1].constants();
    return level * c.linear_end * c.slope / c.level;
  };
  out.levels[n - 2] = config.safety_factor * 0.5;
  out.linear_ends[n - 2] = width_rule(n - 1, out.levels[n - 2]);
  for (int i = n - 2; i >= 1; --i) {
    out.levels[i - 1] = config.safety_factor * out.linear_ends[i] * 0.5;
    out.linear_ends[i - 1] = width_rule(i, out.levels[i - 1]);
  }
  return out;
}

namespace {

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

std::vector<std::vector<double>> binomial_matrix(int n, double alpha) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i <= n - 1; ++i) {
    // row of y_{n-i}: coefficients of x_{n-k}
    double power = 1.0;
    for (int k = 0; k <= i; ++k) {
      m[n - i - 1][n - k - 1] = binomial(i, k) * power;
      power *= alpha;
    }
  }
  return m;
}

std::vector<double> mat_vec(const std::vector<std::vector<double>>& m,
                            std::span<const double> v) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m[r].size(); ++c) out[r] += m[r][c] * v[c];
  return out;
}

} // namespace

std::vector<double> CoordinateChange::to_cascade(std::span<const double> x) const {
  return mat_vec(H, x);
}

std::vector<double> CoordinateChange::from_cascade(std::span<const double> y) const {
  return mat_vec(H_inv, y);
}

CoordinateChange coordinate_change(int n, double alpha) {
  if (n < 1) throw std::invalid_argument("coordinate_change: n >= 1 required");
  if (!(alpha > 0.0)) throw std::invalid_argument("coordinate_change: alpha must be positive");
  CoordinateChange cc;
  cc.n = n;
  cc.alpha = alpha;
  cc.H = binomial_matrix(n, alpha);
  // x_{n-i} = alpha^-i * sum_k C(i,k) (-1)^(i-k) y_{n-k}
  cc.H_inv.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i <= n - 1; ++i) {
    const double row_factor = std::pow(alpha, -i);
    for (int k = 0; k <= i; ++k)
      cc.H_inv[n - i - 1][n - k - 1] = binomial(i, k) * ((i - k) % 2 == 0 ? 1.0 : -1.0) * row_factor;
  }
  // cheap internal audit: H * H_inv = I to rounding
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += cc.H[r][k] * cc.H_inv[k][c];
      const double expected = (r == c) ? 1.0 : 0.0;
      if (std::abs(acc - expected) > 1e-10)
        throw std::logic_error("coordinate_change: inverse audit failed");
    }
  }
  return cc;
}

std::string StabilityReport::first_failure() const {
  for (const auto& c : checks) {
    if (c.pass) continue;
    if (!c.slope_one)
      return "link " + std::to_string(c.link) + " slope is " + std::to_string(c.slope) +
             ", expected 1";
    return "link " + std::to_string(c.link) + " plateau exceeds half the next linearity width";
  }
  return {};
}

StabilityReport validate_stability_conditions(std::span<const SaturationFunction> mu_chain) {
  StabilityReport report;
  const int n = static_cast<int>(mu_chain.size());
  for (int i = 1; i <= n - 1; ++i) {
    StabilityCheck c;
    c.link = i;
    c.slope = mu_chain[i - 1].constants().slope;
    c.slope_one = std::abs(c.slope - 1.0) <= 1e-12;
    c.margin = 0.5 * mu_chain[i].constants().linear_end - mu_chain[i - 1].constants().level;
    c.pass = c.slope_one && c.margin > 0.0;
    report.all_pass = report.all_pass && c.pass;
    report.checks.push_back(c);
  }
  return report;
}

double select_lambda(std::span<const LambdaBoundPolynomial> bounds,
                     std::span<const double> budgets, LambdaPolicy policy) {
  const int p = static_cast<int>(bounds.size());
  if (p == 0) return 1.0;
  if (static_cast<int>(budgets.size()) < p + 1)
    throw std::invalid_argument("select_lambda: budgets must cover orders 0..p");
  std::vector<double> targets(p);
  double floor = budgets[1];
  for (int j = 1; j <= p; ++j) floor = std::min(floor, budgets[j]);
  for (int j = 1; j <= p; ++j)
    targets[j - 1] = (policy == LambdaPolicy::Paper) ? floor : budgets[j];

  auto feasible = [&](double lambda) {
    for (int j = 1; j <= p; ++j)
      if (bounds[j - 1].eval(lambda) > targets[j - 1]) return false;
    return true;
  };

  if (feasible(1.0)) return 1.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && !feasible(hi); ++it) hi *= 2.0;
  if (!feasible(hi)) throw std::logic_error("select_lambda: no feasible width found");
  double lo = hi / 2.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

NestedFeedbackLaw assemble_feedback(const SynthesisConfig& config) {
  config.validate();
  const int n = config.n;
  const int p = config.p;
  const double amplitude = config.budgets[0];

  InnerConstants inner = choose_inner_constants(config);
  if (config.inner_levels) {
    inner.levels = *config.inner_levels;
    inner.linear_ends = *config.inner_linear_ends;
  }
  // strict inequalities of the constructive choice
  if (n >= 2) {
    if (!(inner.levels[n - 2] < 0.5))
      throw std::invalid_argument("synthesis: last inner plateau must stay below 1/2");
    for (int i = 1; i <= n - 2; ++i)
      if (!(inner.levels[i - 1] < 0.5 * inner.linear_ends[i]))
        throw std::invalid_argument("synthesis: inner plateau " + std::to_string(i) +
                                    " must stay below half the next linearity width");
    for (double v : inner.levels)
      if (!(v > 0.0)) throw std::invalid_argument("synthesis: inner plateaus must be positive");
    for (double v : inner.linear_ends)
      if (!(v > 0.0)) throw std::invalid_argument("synthesis: inner widths must be positive");
  }

  // inner chain mu_1..mu_{n-1}, all slope one by the width rule
  std::vector<SaturationFunction> mu_chain;
  std::vector<SaturationAnalysis> inner_analyses;
  for (int i = 1; i <= n - 1; ++i) {
    mu_chain.push_back(rescale(config.saturations[i - 1], inner.levels[i - 1],
                               inner.linear_ends[i - 1]));
    const double prev = (i == 1) ? 0.0 : inner.levels[i - 2];
    inner_analyses.push_back(analyze(mu_chain.back(), prev, p));
  }

  const double prev_level = n >= 2 ? inner.levels[n - 2] : 0.0;
  const SaturationAnalysis outer_unit =
      analyze(rescale(config.saturations[n - 1], amplitude, 1.0), prev_level, p);
  const auto lambda_bounds = lambda_bound_polynomials(inner_analyses, outer_unit, p);

  double lambda;
  if (config.fixed_lambda) {
    lambda = *config.fixed_lambda;
    for (int j = 1; j <= p; ++j) {
      const double target = (config.policy == LambdaPolicy::Paper)
                                ? *std::min_element(config.budgets.begin() + 1, config.budgets.end())
                                : config.budgets[j];
      if (lambda_bounds[j - 1].eval(lambda) > target)
        throw std::invalid_argument("synthesis: fixed lambda violates the order-" +
                                    std::to_string(j) + " budget");
    }
  } else {
    lambda = select_lambda(lambda_bounds, config.budgets, config.policy);
  }

  mu_chain.push_back(rescale(config.saturations[n - 1], amplitude, lambda));
  const double alpha_outer = mu_chain.back().constants().slope;

  const auto stability = validate_stability_conditions(mu_chain);
  if (!stability.all_pass)
    throw std::invalid_argument("synthesis: stability conditions failed: " +
                                stability.first_failure());

  std::vector<SaturationAnalysis> chain = inner_analyses;
  chain.push_back(analyze(mu_chain.back(), prev_level, p));

  NestedFeedbackLaw law;
  law.n = n;
  law.p = p;
  law.lambda = lambda;
  law.amplitude_bound = amplitude;
  law.budgets = config.budgets;
  law.saturations = config.saturations;
  law.mu_chain = mu_chain;
  law.coords = coordinate_change(n, alpha_outer);
  law.tables = compute_bound_tables(chain, p);

  // gains a_i and rows k_i of the nested form
  law.gains.assign(n, 0.0);
  law.k_rows.assign(n, std::vector<double>(n, 0.0));
  auto mu_width = [&](int i) { // L_{mu_i}, with the outer width equal to lambda
    return (i == n) ? lambda : inner.linear_ends[i - 1];
  };
  for (int i = 1; i <= n; ++i) {
    const auto& sig = config.saturations[i - 1].constants();
    if (i == n) {
      law.gains[i - 1] = amplitude / sig.level;
    } else {
      const auto& next = config.saturations[i].constants();
      law.gains[i - 1] = next.linear_end * inner.levels[i - 1] / (mu_width(i + 1) * sig.level);
    }
    const double row_scale = sig.linear_end / mu_width(i);
    for (int c = 0; c < n; ++c) law.k_rows[i - 1][c] = row_scale * law.coords.H[i - 1][c];
  }
  return law;
}

double eval_feedback(const NestedFeedbackLaw& law, std::span<const double> x) {
  if (static_cast<int>(x.size()) != law.n)
    throw std::invalid_argument("eval_feedback: state dimension mismatch");
  double nested = 0.0;
  for (int i = 1; i <= law.n; ++i) {
    double arg = nested;
    for (int c = 0; c < law.n; ++c) arg += law.k_rows[i - 1][c] * x[c];
    nested = law.gains[i - 1] * law.saturations[i - 1].value(arg);
  }
  return -nested;
}

FeedbackDiagnostics eval_feedback_diag(const NestedFeedbackLaw& law, std::span<const double> x) {
  if (static_cast<int>(x.size()) != law.n)
    throw std::invalid_argument("eval_feedback: state dimension mismatch");
  FeedbackDiagnostics d;
  d.nested_args.assign(law.n, 0.0);
  double nested = 0.0;
  for (int i = 1; i <= law.n; ++i) {
    double arg = nested;
    for (int c = 0; c < law.n; ++c) arg += law.k_rows[i - 1][c] * x[c];
    // k_i^T x + a_{i-1} sigma_{i-1}(...) equals z_i scaled by L_{sigma_i}/L_{mu_i}
    const auto& sig = law.saturations[i - 1].constants();
    const auto& mu = law.mu_chain[i - 1].constants();
    d.nested_args[i - 1] = arg * mu.linear_end / sig.linear_end;
    nested = law.gains[i - 1] * law.saturations[i - 1].value(arg);
  }
  d.u = -nested;
  return d;
}

double eval_feedback_cascade(const NestedFeedbackLaw& law, std::span<const double> x) {
  const std::vector<double> y = law.coords.to_cascade(x);
  double carried = 0.0;
  for (int i = 1; i <= law.n - 1; ++i) carried = law.mu_chain[i - 1].value(y[i - 1] + carried);
  return -law.mu_chain[law.n - 1].value(y[law.n - 1] + carried);
}

} // namespace satstack
