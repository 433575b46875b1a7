#pragma once

#include <vector>

namespace satstack {

/// Dense univariate polynomial with real coefficients in ascending degree
/// order. The zero polynomial has an empty coefficient vector.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static Polynomial constant(double c) { return Polynomial({c}); }

  double eval(double x) const;
  /// Value of the order-th derivative at x, allocation-free.
  double eval_derivative(double x, int order) const;

  Polynomial derivative() const;
  Polynomial derivative(int order) const;

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }
  bool is_zero() const { return coeffs_.empty(); }

  /// q(x) = p(a + b x).
  Polynomial compose_affine(double a, double b) const;
  /// q(x) = p(b x); cheaper special case used by saturation rescaling.
  Polynomial scale_argument(double b) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }

private:
  void trim();
  std::vector<double> coeffs_;
};

/// Real roots of q in [lo, hi], ascending, de-duplicated. Uses companion-matrix
/// eigenvalues with Newton polishing; falls back to a dense sign-change scan
/// when the eigenproblem is ill-conditioned.
std::vector<double> real_roots_in(const Polynomial& q, double lo, double hi);

/// max of |q| over [lo, hi] (endpoints and interior critical points).
double max_abs_on(const Polynomial& q, double lo, double hi);
/// min of q over [lo, hi].
double min_on(const Polynomial& q, double lo, double hi);
/// max of q over [lo, hi].
double max_on(const Polynomial& q, double lo, double hi);

} // namespace satstack
