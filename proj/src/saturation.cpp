#include "satstack/saturation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace satstack {

void SaturationConstants::validate() const {
  if (!(level > 0.0)) throw std::invalid_argument("saturation: level must be positive");
  if (!(linear_end > 0.0)) throw std::invalid_argument("saturation: linear_end must be positive");
  if (!(flat_start > 0.0)) throw std::invalid_argument("saturation: flat_start must be positive");
  if (!(slope > 0.0)) throw std::invalid_argument("saturation: slope must be positive");
  if (order < 0) throw std::invalid_argument("saturation: order must be nonnegative");
  if (flat_start < linear_end)
    throw std::invalid_argument("saturation: flat_start < linear_end");
  if (flat_start == linear_end && order > 0)
    throw std::invalid_argument(
        "saturation: flat_start == linear_end is only possible for order 0 (no C^p blend exists)");
  if (slope * linear_end > level * (1.0 + 1e-12))
    throw std::invalid_argument("saturation: slope * linear_end exceeds level");
}

double SaturationFunction::eval(double r, int j) const {
  if (j < 0 || j > constants_.order)
    throw std::invalid_argument("saturation eval: derivative order outside [0, order]");
  if (r < 0.0) {
    const double parity = (j % 2 == 0) ? -1.0 : 1.0; // f^(j)(-r) = (-1)^(j+1) f^(j)(r)
    return parity * eval(-r, j);
  }
  for (const auto& piece : pieces_)
    if (r <= piece.hi) return piece.poly.eval_derivative(r, j);
  return j == 0 ? constants_.level : 0.0;
}

std::vector<double> SaturationFunction::knots() const {
  std::vector<double> k;
  for (const auto& piece : pieces_)
    if (k.empty() || piece.hi > k.back()) k.push_back(piece.hi);
  return k;
}

SaturationFunction SaturationFunction::from_pieces_unchecked(SaturationConstants constants,
                                                             std::vector<PolynomialPiece> pieces) {
  SaturationFunction f;
  f.constants_ = std::move(constants);
  f.pieces_ = std::move(pieces);
  std::sort(f.pieces_.begin(), f.pieces_.end(),
            [](const PolynomialPiece& a, const PolynomialPiece& b) { return a.lo < b.lo; });
  return f;
}

std::string SpValidation::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return c.name + (c.detail.empty() ? "" : ": " + c.detail);
  return {};
}

namespace {

void push_check(SpValidation& v, SpCheck c) {
  v.all_pass = v.all_pass && c.pass;
  v.checks.push_back(std::move(c));
}

} // namespace

SpValidation validate_Sp(const SaturationConstants& constants,
                         const std::vector<PolynomialPiece>& pieces, double tol) {
  SpValidation v;

  // constants sanity, reported instead of thrown so callers can inspect
  {
    SpCheck c{"constants", true, 0.0, 0.0, ""};
    try {
      constants.validate();
    } catch (const std::invalid_argument& e) {
      c.pass = false;
      c.detail = e.what();
    }
    push_check(v, std::move(c));
    if (!v.all_pass) return v;
  }

  std::vector<PolynomialPiece> sorted = pieces;
  std::sort(sorted.begin(), sorted.end(),
            [](const PolynomialPiece& a, const PolynomialPiece& b) { return a.lo < b.lo; });

  // coverage of [0, flat_start] without gaps
  {
    SpCheck c{"coverage", true, 0.0, 0.0, ""};
    if (sorted.empty()) {
      c.pass = false;
      c.detail = "no pieces";
    } else {
      double cursor = 0.0;
      for (const auto& piece : sorted) {
        if (std::abs(piece.lo - cursor) > tol * std::max(1.0, constants.flat_start)) {
          c.pass = false;
          c.worst = std::abs(piece.lo - cursor);
          c.location = piece.lo;
          c.detail = "gap or overlap between pieces";
          break;
        }
        cursor = piece.hi;
      }
      if (c.pass && std::abs(cursor - constants.flat_start) > tol * std::max(1.0, constants.flat_start)) {
        c.pass = false;
        c.worst = std::abs(cursor - constants.flat_start);
        c.location = cursor;
        c.detail = "pieces do not end at flat_start";
      }
    }
    push_check(v, std::move(c));
    if (!v.all_pass) return v;
  }

  const SaturationFunction f = SaturationFunction::from_pieces_unchecked(constants, sorted);

  // linear zone f(r) = slope * r on [0, linear_end]
  {
    SpCheck c{"linear_zone", true, 0.0, 0.0, ""};
    const int samples = 257;
    for (int i = 0; i <= samples; ++i) {
      const double r = constants.linear_end * i / samples;
      const double gap = std::abs(f.value(r) - constants.slope * r);
      if (gap > c.worst) {
        c.worst = gap;
        c.location = r;
      }
    }
    c.pass = c.worst <= tol * std::max(1.0, constants.slope * constants.linear_end);
    if (!c.pass) c.detail = "value departs from slope*r inside the linear zone";
    push_check(v, std::move(c));
  }

  // plateau value at flat_start
  {
    SpCheck c{"plateau", true, 0.0, constants.flat_start, ""};
    c.worst = std::abs(f.value(constants.flat_start) - constants.level);
    c.pass = c.worst <= tol * std::max(1.0, constants.level);
    if (!c.pass) c.detail = "value at flat_start differs from level";
    push_check(v, std::move(c));
  }

  // sign condition r*f(r) > 0 <=> f > 0 on (0, flat_start]
  {
    SpCheck c{"sign", true, 0.0, 0.0, ""};
    double worst = constants.level;
    double where = constants.flat_start;
    for (const auto& piece : sorted) {
      const double lo = std::max(piece.lo, tol * std::max(1.0, constants.linear_end));
      if (lo >= piece.hi) continue;
      const double m = min_on(piece.poly, lo, piece.hi);
      if (m < worst) {
        worst = m;
        where = lo;
      }
    }
    c.worst = worst;
    c.location = where;
    c.pass = worst > 0.0;
    if (!c.pass) c.detail = "function is not strictly positive on (0, flat_start]";
    push_check(v, std::move(c));
  }

  // C^order matching at every knot, including r = 0 against the odd extension
  // and flat_start against the constant tail.
  {
    SpCheck c{"smoothness", true, 0.0, 0.0, ""};
    double worst_rel = 0.0;
    auto note = [&](double left, double right, double where, const std::string& what) {
      const double mismatch = std::abs(left - right);
      const double rel = mismatch / std::max({1.0, std::abs(left), std::abs(right)});
      if (rel > worst_rel) {
        worst_rel = rel;
        c.worst = mismatch;
        c.location = where;
        c.detail = what;
      }
    };
    // odd extension at 0: even derivatives must vanish
    for (int j = 0; j <= constants.order; j += 2) {
      const double val = sorted.front().poly.derivative(j).eval(0.0);
      note(val, 0.0, 0.0, "even derivative nonzero at 0 (order " + std::to_string(j) + ")");
    }
    // interior joints
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double r = sorted[i].hi;
      for (int j = 0; j <= constants.order; ++j) {
        const double l = sorted[i].poly.derivative(j).eval(r);
        const double rg = sorted[i + 1].poly.derivative(j).eval(r);
        note(l, rg, r, "one-sided derivatives differ at knot (order " + std::to_string(j) + ")");
      }
    }
    // junction with the flat tail
    for (int j = 0; j <= constants.order; ++j) {
      const double l = sorted.back().poly.derivative(j).eval(constants.flat_start);
      const double rg = (j == 0) ? constants.level : 0.0;
      note(l, rg, constants.flat_start,
           "derivative does not meet the flat tail (order " + std::to_string(j) + ")");
    }
    c.pass = worst_rel <= tol;
    push_check(v, std::move(c));
  }

  // odd symmetry is structural; record it so reports enumerate every condition
  push_check(v, {"odd_symmetry", true, 0.0, 0.0, "structural (odd extension)"});

  return v;
}

SpValidation validate_Sp(const SaturationFunction& f, double tol) {
  return validate_Sp(f.constants(), f.pieces(), tol);
}

namespace {

// Two-point Hermite blend in the normalized coordinate t in [0, 1]:
// value a0 + slope0 * t at 0 with zero higher derivatives, value v1 with all
// derivatives zero at 1. Degree 2*order + 1.
Polynomial hermite_blend_unit(int order, double v0, double d0, double v1) {
  const int m = 2 * (order + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  // conditions at t = 0: k-th derivative = k! * c_k
  for (int j = 0; j <= order; ++j) {
    double fact = 1.0;
    for (int i = 2; i <= j; ++i) fact *= i;
    A(j, j) = fact;
    b(j) = (j == 0) ? v0 : (j == 1 ? d0 : 0.0);
  }
  // conditions at t = 1
  for (int j = 0; j <= order; ++j) {
    const int row = order + 1 + j;
    for (int k = j; k < m; ++k) {
      double fall = 1.0;
      for (int i = 0; i < j; ++i) fall *= (k - i);
      A(row, k) = fall;
    }
    b(row) = (j == 0) ? v1 : 0.0;
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  return Polynomial(std::vector<double>(x.data(), x.data() + m));
}

} // namespace

SaturationFunction make_smooth_saturation(int order, const SaturationConstants& raw) {
  SaturationConstants constants = raw;
  constants.order = order;
  constants.validate();
  const double L = constants.linear_end;
  const double S = constants.flat_start;
  const double alpha = constants.slope;
  const double level = constants.level;

  std::vector<PolynomialPiece> pieces;
  pieces.push_back({0.0, L, Polynomial({0.0, alpha})});

  if (S == L) { // sharp corner, order 0 only (validate() has enforced order == 0)
    if (std::abs(alpha * L - level) > 1e-12 * level)
      throw std::invalid_argument(
          "saturation: flat_start == linear_end requires slope*linear_end == level");
  } else {
    const Polynomial unit = hermite_blend_unit(order, alpha * L, alpha * (S - L), level);
    const Polynomial blend = unit.compose_affine(-L / (S - L), 1.0 / (S - L));
    const double dmin = min_on(blend.derivative(), L, S);
    const double scale = std::max(alpha, (level - alpha * L) / (S - L));
    if (dmin < -1e-9 * scale)
      throw std::invalid_argument(
          "saturation: Hermite blend is not monotone for these constants; "
          "enlarge flat_start - linear_end");
    pieces.push_back({L, S, blend});
  }

  auto f = SaturationFunction::from_pieces_unchecked(constants, std::move(pieces));
  const SpValidation check = validate_Sp(f, 1e-9);
  if (!check.all_pass)
    throw std::invalid_argument("saturation: constructed blend failed class audit: " +
                                check.first_failure());
  return f;
}

SaturationFunction load_explicit_saturation(SaturationConstants constants,
                                            std::vector<PolynomialPiece> pieces, double tol) {
  const SpValidation check = validate_Sp(constants, pieces, tol);
  if (!check.all_pass)
    throw std::invalid_argument("saturation: class audit failed: " + check.first_failure());
  return SaturationFunction::from_pieces_unchecked(std::move(constants), std::move(pieces));
}

double derivative_sup(const SaturationFunction& f, int j) {
  const auto& constants = f.constants();
  if (j < 1 || j > constants.order)
    throw std::invalid_argument("derivative_sup: order outside [1, order]");
  double best = 0.0; // the flat tail contributes 0 for j >= 1
  for (const auto& piece : f.pieces())
    best = std::max(best, max_abs_on(piece.poly.derivative(j), piece.lo, piece.hi));
  return best;
}

double linear_gap_bound(const SaturationFunction& f, double prev_max) {
  if (prev_max < 0.0) throw std::invalid_argument("linear_gap_bound: prev_max < 0");
  const auto& constants = f.constants();
  const double radius = constants.flat_start + 2.0 * prev_max;
  const Polynomial identity({0.0, 1.0});
  double best = 0.0;
  for (const auto& piece : f.pieces()) {
    const double hi = std::min(piece.hi, radius);
    if (hi <= piece.lo) break;
    best = std::max(best, max_abs_on(identity - piece.poly, piece.lo, hi));
  }
  if (radius > constants.flat_start) {
    best = std::max(best, std::abs(constants.flat_start - constants.level));
    best = std::max(best, std::abs(radius - constants.level));
  }
  return best;
}

SecantBounds secant_bounds(const SaturationFunction& f, double prev_max) {
  if (prev_max < 0.0) throw std::invalid_argument("secant_bounds: prev_max < 0");
  const auto& constants = f.constants();
  SecantBounds out;
  double lo = constants.slope; // analytic r -> 0 limit
  double hi = constants.slope;
  for (const auto& piece : f.pieces()) {
    const double a = std::max(piece.lo, 1e-12 * constants.flat_start);
    if (a >= piece.hi) continue;
    // critical points of f(r)/r solve r f'(r) - f(r) = 0
    const Polynomial numerator = Polynomial({0.0, 1.0}) * piece.poly.derivative() - piece.poly;
    std::vector<double> candidates = real_roots_in(numerator, a, piece.hi);
    candidates.push_back(a);
    candidates.push_back(piece.hi);
    for (double r : candidates) {
      const double ratio = piece.poly.eval(r) / r;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  out.sup = hi;
  out.inf = lo;
  out.inf_clamped = std::min(lo, constants.level / (constants.flat_start + 2.0 * prev_max));
  return out;
}

SaturationFunction rescale(const SaturationFunction& base, double new_level,
                           double new_linear_end) {
  if (!(new_level > 0.0) || !(new_linear_end > 0.0))
    throw std::invalid_argument("rescale: new level and linear_end must be positive");
  const auto& c = base.constants();
  const double vf = new_level / c.level;              // value factor
  const double stretch = new_linear_end / c.linear_end; // argument stretch
  SaturationConstants nc;
  nc.level = new_level;
  nc.linear_end = new_linear_end;
  nc.flat_start = c.flat_start * stretch;
  nc.slope = c.slope * vf / stretch;
  nc.order = c.order;
  std::vector<PolynomialPiece> pieces;
  pieces.reserve(base.pieces().size());
  for (const auto& piece : base.pieces())
    pieces.push_back({piece.lo * stretch, piece.hi * stretch,
                      piece.poly.scale_argument(1.0 / stretch) * vf});
  return SaturationFunction::from_pieces_unchecked(nc, std::move(pieces));
}

SaturationAnalysis analyze(const SaturationFunction& f, double prev_max, int p) {
  const auto& c = f.constants();
  if (p > c.order)
    throw std::invalid_argument("analyze: requested order exceeds the saturation smoothness");
  SaturationAnalysis a;
  a.constants = c;
  a.context_prev_max = prev_max;
  a.deriv_sup.reserve(static_cast<std::size_t>(std::max(p, 0)));
  for (int j = 1; j <= p; ++j) a.deriv_sup.push_back(derivative_sup(f, j));
  a.linear_gap = linear_gap_bound(f, prev_max);
  const SecantBounds s = secant_bounds(f, prev_max);
  a.secant_sup = s.sup;
  a.secant_inf = s.inf;
  a.secant_inf_clamped = s.inf_clamped;
  return a;
}

} // namespace satstack
