#include "satstack/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace satstack {

namespace {

constexpr double kTrimRel = 1e-14;

} // namespace

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::eval(double x) const {
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x + coeffs_[k];
  return acc;
}

double Polynomial::eval_derivative(double x, int order) const {
  if (order <= 0) return eval(x);
  if (static_cast<std::size_t>(order) >= coeffs_.size()) return 0.0;
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > static_cast<std::size_t>(order);) {
    double fall = 1.0;
    for (int i = 0; i < order; ++i) fall *= static_cast<double>(k - i);
    acc = acc * x + coeffs_[k] * fall;
  }
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::derivative(int order) const {
  Polynomial p = *this;
  for (int j = 0; j < order; ++j) p = p.derivative();
  return p;
}

Polynomial Polynomial::compose_affine(double a, double b) const {
  // Horner in the affine argument: result = (((c_n)(a+bx) + c_{n-1})(a+bx) + ...)
  Polynomial acc;
  const Polynomial arg({a, b});
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    acc = acc * arg;
    acc += Polynomial::constant(coeffs_[k]);
  }
  return acc;
}

Polynomial Polynomial::scale_argument(double b) const {
  std::vector<double> c = coeffs_;
  double f = 1.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    f *= b;
    c[k] *= f;
  }
  return Polynomial(std::move(c));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> c(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) c[k] += o.coeffs_[k];
  return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  std::vector<double> c(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) c[k] -= o.coeffs_[k];
  return Polynomial(std::move(c));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (coeffs_.empty() || o.coeffs_.empty()) return {};
  std::vector<double> c(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) c[i + j] += coeffs_[i] * o.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial Polynomial::operator*(double s) const {
  std::vector<double> c = coeffs_;
  for (double& v : c) v *= s;
  return Polynomial(std::move(c));
}

namespace {

// Drop leading coefficients that are negligible against the largest one; they
// produce spurious huge companion eigenvalues.
std::vector<double> effective_coeffs(const Polynomial& q) {
  std::vector<double> c = q.coeffs();
  double mx = 0.0;
  for (double v : c) mx = std::max(mx, std::abs(v));
  if (mx == 0.0) return {};
  while (c.size() > 1 && std::abs(c.back()) < kTrimRel * mx) c.pop_back();
  return c;
}

double polish_root(const Polynomial& q, const Polynomial& dq, double x, double lo, double hi) {
  for (int it = 0; it < 40; ++it) {
    const double f = q.eval(x);
    const double d = dq.eval(x);
    if (d == 0.0) break;
    const double step = f / d;
    const double nx = std::clamp(x - step, lo, hi);
    if (std::abs(nx - x) <= 1e-16 * (1.0 + std::abs(x))) {
      x = nx;
      break;
    }
    x = nx;
  }
  return x;
}

std::vector<double> scan_roots(const Polynomial& q, double lo, double hi) {
  // Fallback: dense sign-change scan followed by bisection.
  std::vector<double> roots;
  const int kSamples = 100000;
  const double h = (hi - lo) / kSamples;
  double prev = q.eval(lo);
  for (int i = 1; i <= kSamples; ++i) {
    const double x = lo + i * h;
    const double cur = q.eval(x);
    if (prev == 0.0) roots.push_back(x - h);
    if (prev * cur < 0.0) {
      double a = x - h, b = x, fa = prev;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = q.eval(m);
        if (fa * fm <= 0.0) b = m;
        else {
          a = m;
          fa = fm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  if (prev == 0.0) roots.push_back(hi);
  return roots;
}

} // namespace

std::vector<double> real_roots_in(const Polynomial& q, double lo, double hi) {
  std::vector<double> out;
  if (!(hi > lo)) return out;
  std::vector<double> c = effective_coeffs(q);
  if (c.size() <= 1) return out; // constant: no isolated roots worth reporting

  const double span = hi - lo;
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg == 1) {
    const double r = -c[0] / c[1];
    if (r >= lo && r <= hi) out.push_back(r);
    return out;
  }
  if (deg == 2) {
    const double a = c[2], b = c[1], d = c[0];
    const double disc = b * b - 4.0 * a * d;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      // Citardauq ordering for accuracy
      const double r1 = (-b - std::copysign(s, b)) / (2.0 * a);
      const double r2 = d / (a * r1);
      for (double r : {r1, r2})
        if (std::isfinite(r) && r >= lo && r <= hi) out.push_back(r);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c[i] / c[deg];

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    out = scan_roots(q, lo, hi);
    return out;
  }
  const Polynomial dq = q.derivative();
  const auto vals = solver.eigenvalues();
  for (int i = 0; i < vals.size(); ++i) {
    const double re = vals[i].real();
    const double im = vals[i].imag();
    if (std::abs(im) > 1e-8 * (1.0 + std::abs(re))) continue;
    if (re < lo - 1e-9 * span || re > hi + 1e-9 * span) continue;
    out.push_back(polish_root(q, dq, std::clamp(re, lo, hi), lo, hi));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [&](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + span); }),
            out.end());
  return out;
}

namespace {

template <class F>
double reduce_on(const Polynomial& q, double lo, double hi, F&& f) {
  double best = f(q.eval(lo), q.eval(hi));
  for (double r : real_roots_in(q.derivative(), lo, hi)) best = f(best, q.eval(r));
  return best;
}

} // namespace

double max_abs_on(const Polynomial& q, double lo, double hi) {
  double best = std::max(std::abs(q.eval(lo)), std::abs(q.eval(hi)));
  for (double r : real_roots_in(q.derivative(), lo, hi)) best = std::max(best, std::abs(q.eval(r)));
  return best;
}

double min_on(const Polynomial& q, double lo, double hi) {
  return reduce_on(q, lo, hi, [](double a, double b) { return std::min(a, b); });
}

double max_on(const Polynomial& q, double lo, double hi) {
  return reduce_on(q, lo, hi, [](double a, double b) { return std::max(a, b); });
}

} // namespace satstack
