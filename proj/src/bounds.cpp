#include "satstack/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "satstack/bell.hpp"

namespace satstack {

double composed_derivative_bound(double ambient, std::span<const double> arg_bounds,
                                 std::span<const double> sat_deriv_sups) {
  const int k = static_cast<int>(arg_bounds.size());
  if (k < 1) throw std::invalid_argument("composed_derivative_bound: k >= 1 required");
  if (sat_deriv_sups.size() != arg_bounds.size())
    throw std::invalid_argument("composed_derivative_bound: length mismatch");
  if (ambient < 0.0) throw std::invalid_argument("composed_derivative_bound: negative ambient bound");
  double sum = ambient;
  for (int a = 1; a <= k; ++a) {
    if (sat_deriv_sups[a - 1] < 0.0)
      throw std::invalid_argument("composed_derivative_bound: negative derivative bound");
    sum += sat_deriv_sups[a - 1] * bell_eval_upper(k, a, arg_bounds);
  }
  return sum;
}

namespace {

// The recursion is shared between plain numbers and polynomials in w = 1/lambda.
template <class T>
struct Lift {
  static T from(double c) { return T(c); }
};
template <>
struct Lift<Polynomial> {
  static Polynomial from(double c) { return Polynomial::constant(c); }
};

template <class T>
T bell_eval_generic(int k, int a, const std::vector<T>& vals) {
  T sum = Lift<T>::from(0.0);
  for (const auto& term : bell_terms(k, a)) {
    T prod = Lift<T>::from(static_cast<double>(term.coeff));
    for (std::size_t l = 0; l < term.delta.size(); ++l)
      for (int rep = 0; rep < term.delta[l]; ++rep) prod = prod * vals[l];
    sum += prod;
  }
  return sum;
}

template <class T>
struct ChainQuantities {
  int n = 0;
  int p = 0;
  T alpha_outer;             // slope of the outermost link
  T outer_secant_slack;      // (secant_sup - clamped inf) * (flat_start + 2 prev_max)
  T outer_level;             // plateau of the outermost link
  std::vector<T> outer_deriv_sup;            // [j-1], j = 1..p
  std::vector<std::vector<double>> inner_deriv_sup; // [i-1][j-1] for links 1..n-1
  std::vector<double> inner_gap;             // [i-1]
  std::vector<double> inner_level;           // [i-1]
};

template <class T>
struct TablesT {
  std::vector<std::vector<T>> Y, Z, G;
  std::vector<T> u_bound;
};

template <class T>
TablesT<T> run_recursion(const ChainQuantities<T>& q) {
  const int n = q.n;
  const int p = q.p;
  auto grid = [&](int rows, int cols) {
    return std::vector<std::vector<T>>(static_cast<std::size_t>(rows) + 1,
                                       std::vector<T>(static_cast<std::size_t>(cols) + 1,
                                                      Lift<T>::from(0.0)));
  };
  TablesT<T> t;
  t.Y = grid(n, p);
  t.Z = grid(n, p);
  t.G = grid(p, p);
  t.u_bound.assign(static_cast<std::size_t>(p) + 1, Lift<T>::from(0.0));
  if (p < 1) return t;

  // first order
  t.Y[n][1] = q.outer_level;
  for (int i = 1; i <= n - 1; ++i) {
    double tail = q.inner_level[i - 1];
    for (int l = i + 1; l <= n - 1; ++l) tail += q.inner_gap[l - 1];
    t.Y[i][1] = q.outer_secant_slack + q.alpha_outer * tail;
  }
  t.Z[1][1] = t.Y[1][1];
  for (int i = 2; i <= n; ++i)
    t.Z[i][1] = t.Y[i][1] + t.Z[i - 1][1] * q.inner_deriv_sup[i - 2][0];
  t.G[1][1] = t.Z[n][1];
  t.u_bound[1] = t.G[1][1] * q.outer_deriv_sup[0];

  for (int j = 2; j <= p; ++j) {
    for (int i = 1; i <= n; ++i) {
      T acc = Lift<T>::from(0.0);
      for (int b = i + 1; b <= n; ++b) acc += t.Y[b][j - 1];
      acc = q.alpha_outer * acc;
      for (int qq = 1; qq <= j - 1; ++qq) acc += t.G[qq][j - 1] * q.outer_deriv_sup[qq - 1];
      t.Y[i][j] = acc;
    }
    t.Z[1][j] = t.Y[1][j];
    for (int i = 2; i <= n; ++i) {
      T acc = t.Y[i][j];
      std::vector<T> args(t.Z[i - 1].begin() + 1, t.Z[i - 1].begin() + 1 + j);
      for (int a = 1; a <= j; ++a)
        acc += bell_eval_generic<T>(j, a, args) * q.inner_deriv_sup[i - 2][a - 1];
      t.Z[i][j] = acc;
    }
    std::vector<T> outer_args(t.Z[n].begin() + 1, t.Z[n].begin() + 1 + j);
    for (int qq = 1; qq <= j; ++qq) {
      t.G[qq][j] = bell_eval_generic<T>(j, qq, outer_args);
      t.u_bound[j] += t.G[qq][j] * q.outer_deriv_sup[qq - 1];
    }
  }
  return t;
}

} // namespace

BoundTables compute_bound_tables(std::span<const SaturationAnalysis> chain, int p) {
  const int n = static_cast<int>(chain.size());
  if (n < 1) throw std::invalid_argument("compute_bound_tables: empty chain");
  if (p < 0) throw std::invalid_argument("compute_bound_tables: p < 0");
  for (int i = 0; i < n; ++i)
    if (static_cast<int>(chain[i].deriv_sup.size()) < p)
      throw std::invalid_argument("compute_bound_tables: analysis " + std::to_string(i + 1) +
                                  " lacks derivative bounds up to order " + std::to_string(p));
  const double prev_level = n >= 2 ? chain[n - 2].constants.level : 0.0;
  if (std::abs(chain[n - 1].context_prev_max - prev_level) >
      1e-9 * std::max(1.0, prev_level))
    throw std::invalid_argument(
        "compute_bound_tables: outer analysis context_prev_max does not match the "
        "preceding plateau");

  ChainQuantities<double> q;
  q.n = n;
  q.p = p;
  const SaturationAnalysis& outer = chain[n - 1];
  q.alpha_outer = outer.constants.slope;
  q.outer_level = outer.constants.level;
  q.outer_secant_slack = (outer.secant_sup - outer.secant_inf_clamped) *
                         (outer.constants.flat_start + 2.0 * outer.context_prev_max);
  q.outer_deriv_sup.assign(outer.deriv_sup.begin(), outer.deriv_sup.begin() + p);
  for (int i = 1; i <= n - 1; ++i) {
    q.inner_deriv_sup.push_back(
        std::vector<double>(chain[i - 1].deriv_sup.begin(), chain[i - 1].deriv_sup.begin() + p));
    q.inner_gap.push_back(chain[i - 1].linear_gap);
    q.inner_level.push_back(chain[i - 1].constants.level);
  }

  const TablesT<double> t = run_recursion(q);
  BoundTables out;
  out.n = n;
  out.p = p;
  out.Y = t.Y;
  out.Z = t.Z;
  out.G = t.G;
  out.u_bound = t.u_bound;
  return out;
}

double LambdaBoundPolynomial::eval(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda bound: lambda must be positive");
  const double w = 1.0 / lambda;
  const Polynomial& poly = (w < switch_w) ? secant_branch : clamp_branch;
  return w * poly.eval(w);
}

std::vector<LambdaBoundPolynomial> lambda_bound_polynomials(
    std::span<const SaturationAnalysis> inner, const SaturationAnalysis& outer_unit, int p) {
  const int n = static_cast<int>(inner.size()) + 1;
  if (p < 0) throw std::invalid_argument("lambda_bound_polynomials: p < 0");
  if (static_cast<int>(outer_unit.deriv_sup.size()) < p)
    throw std::invalid_argument("lambda_bound_polynomials: outer analysis lacks derivatives");

  const double amplitude = outer_unit.constants.level;       // R_0
  const double flat_unit = outer_unit.constants.flat_start;  // S of the lambda = 1 function
  const double secant_hi = outer_unit.secant_sup;
  const double secant_lo = outer_unit.secant_inf;
  const double prev_level = n >= 2 ? inner.back().constants.level : 0.0;

  const Polynomial w({0.0, 1.0});
  // radius factor (flat_start + 2 prev_max) of the lambda-scaled outer link,
  // divided by lambda: flat_unit + 2 prev_level * w
  const Polynomial radius_over_lambda({flat_unit, 2.0 * prev_level});

  // The clamped secant infimum is min(secant_lo, amplitude/radius)/lambda; the
  // active branch flips where secant_lo * radius_over_lambda crosses amplitude.
  double switch_w = 0.0;
  if (prev_level > 0.0 && secant_lo * flat_unit < amplitude)
    switch_w = (amplitude - secant_lo * flat_unit) / (2.0 * prev_level * secant_lo);

  auto build = [&](bool clamp_active) {
    ChainQuantities<Polynomial> q;
    q.n = n;
    q.p = p;
    q.alpha_outer = w * outer_unit.constants.slope;
    q.outer_level = Polynomial::constant(amplitude);
    q.outer_secant_slack =
        clamp_active ? radius_over_lambda * secant_hi - Polynomial::constant(amplitude)
                     : radius_over_lambda * (secant_hi - secant_lo);
    for (int j = 1; j <= p; ++j) {
      Polynomial wj = Polynomial::constant(outer_unit.deriv_sup[j - 1]);
      for (int rep = 0; rep < j; ++rep) wj = wj * w;
      q.outer_deriv_sup.push_back(wj);
    }
    for (int i = 1; i <= n - 1; ++i) {
      q.inner_deriv_sup.push_back(std::vector<double>(inner[i - 1].deriv_sup.begin(),
                                                      inner[i - 1].deriv_sup.begin() + p));
      q.inner_gap.push_back(inner[i - 1].linear_gap);
      q.inner_level.push_back(inner[i - 1].constants.level);
    }
    return run_recursion(q);
  };

  const TablesT<Polynomial> clamp_tables = build(true);
  const bool dual = switch_w > 0.0;
  TablesT<Polynomial> secant_tables;
  if (dual) secant_tables = build(false);

  std::vector<LambdaBoundPolynomial> out;
  for (int j = 1; j <= p; ++j) {
    LambdaBoundPolynomial lbp;
    lbp.order = j;
    lbp.switch_w = switch_w;
    // u_bound[j](w) has no constant term; store P with bound = w * P(w).
    auto strip_w = [](const Polynomial& poly) {
      std::vector<double> c = poly.coeffs();
      if (!c.empty()) {
        if (std::abs(c.front()) > 1e-12)
          throw std::logic_error("lambda bound: expected vanishing constant term");
        c.erase(c.begin());
      }
      return Polynomial(std::move(c));
    };
    lbp.clamp_branch = strip_w(clamp_tables.u_bound[j]);
    lbp.secant_branch = dual ? strip_w(secant_tables.u_bound[j]) : lbp.clamp_branch;
    out.push_back(std::move(lbp));
  }
  return out;
}

} // namespace satstack
