#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "satstack/saturation.hpp"

using namespace satstack;
using testing::reference_quartic;
using testing::sampled_max;
using testing::sampled_sup;

namespace {

SaturationConstants quartic_constants(int order = 2) {
  SaturationConstants c;
  c.level = 2.0;
  c.linear_end = 1.0;
  c.flat_start = 2.0;
  c.slope = 1.0;
  c.order = order;
  return c;
}

} // namespace

TEST_CASE("explicit reference pieces: values, oddness, plateau") {
  const auto sigma = reference_quartic();
  CHECK(sigma.value(0.0) == doctest::Approx(0.0));
  CHECK(sigma.value(0.5) == doctest::Approx(0.5));
  CHECK(sigma.value(1.5) == doctest::Approx(1.625)); // first blend piece at its right knot
  CHECK(sigma.value(2.0) == doctest::Approx(2.0));   // second blend meets the plateau
  CHECK(sigma.value(3.0) == doctest::Approx(2.0));
  CHECK(sigma.value(-1.5) == doctest::Approx(-1.625));
  CHECK(sigma.value(-3.0) == doctest::Approx(-2.0));
}

TEST_CASE("derivative evaluation and parity") {
  const auto sigma = reference_quartic();
  CHECK(sigma.eval(0.5, 1) == doctest::Approx(1.0));
  CHECK(sigma.eval(3.0, 1) == doctest::Approx(0.0));
  CHECK(sigma.eval(1.0, 1) == doctest::Approx(1.0)); // blend slope matches the linear zone
  CHECK_THROWS_AS((sigma.eval(0.5, 3)), std::invalid_argument);

  // f^(j)(-r) = (-1)^(j+1) f^(j)(r)
  for (int j = 0; j <= 2; ++j) {
    const double parity = (j % 2 == 0) ? -1.0 : 1.0;
    for (double r : {0.2, 0.9, 1.2, 1.7, 2.5}) {
      CHECK(sigma.eval(-r, j) == doctest::Approx(parity * sigma.eval(r, j)).epsilon(1e-14));
    }
  }
}

TEST_CASE("class audit: reference passes at order 2, fails the C3 knot check") {
  const auto sigma = reference_quartic();
  const auto ok = validate_Sp(sigma, 1e-9);
  CHECK(ok.all_pass);

  auto claimed3 = quartic_constants(3);
  const auto bad = validate_Sp(claimed3, sigma.pieces(), 1e-9);
  CHECK_FALSE(bad.all_pass);
  bool smoothness_failed = false;
  for (const auto& c : bad.checks)
    if (c.name == "smoothness" && !c.pass) {
      smoothness_failed = true;
      // third derivative of the first blend at its left knot is 60 - 48 = 12
      CHECK(c.worst == doctest::Approx(12.0).epsilon(1e-9));
      CHECK(c.location == doctest::Approx(1.0));
    }
  CHECK(smoothness_failed);
}

TEST_CASE("smooth construction across orders") {
  for (int p : {0, 1, 2, 3, 4}) {
    CAPTURE(p);
    const auto f = make_smooth_saturation(p, quartic_constants(p));
    const auto audit = validate_Sp(f, 1e-9);
    CHECK(audit.all_pass);
    CHECK(f.value(0.5) == doctest::Approx(0.5));
    CHECK(f.value(3.0) == doctest::Approx(2.0));
    CHECK(f.value(0.0) == doctest::Approx(0.0));
  }
}

TEST_CASE("smooth construction: rejections") {
  // no C^p blend exists when the blend interval collapses
  SaturationConstants kink = quartic_constants(1);
  kink.flat_start = kink.linear_end;
  kink.level = kink.slope * kink.linear_end;
  CHECK_THROWS_AS((make_smooth_saturation(1, kink)), std::invalid_argument);

  // linear zone may not exceed the plateau
  SaturationConstants tall = quartic_constants(2);
  tall.slope = 3.0;
  CHECK_THROWS_AS((make_smooth_saturation(2, tall)), std::invalid_argument);

  // a nearly flat rise with unit entry slope forces a non-monotone blend
  SaturationConstants overshoot = quartic_constants(2);
  overshoot.level = 1.05;
  CHECK_THROWS_AS((make_smooth_saturation(2, overshoot)), std::invalid_argument);

  // order-0 sharp saturation is fine
  SaturationConstants sharp;
  sharp.level = 2.0;
  sharp.linear_end = 2.0;
  sharp.flat_start = 2.0;
  sharp.slope = 1.0;
  sharp.order = 0;
  const auto f = make_smooth_saturation(0, sharp);
  CHECK(f.value(1.0) == doctest::Approx(1.0));
  CHECK(f.value(5.0) == doctest::Approx(2.0));
}

TEST_CASE("derivative_sup against the dense-sampling oracle") {
  const auto sigma = reference_quartic();
  const double sup1 = derivative_sup(sigma, 1);
  const double sup2 = derivative_sup(sigma, 2);

  const double oracle1 = sampled_sup([&](double r) { return sigma.eval(r, 1); }, 0.0, 2.0);
  const double oracle2 = sampled_sup([&](double r) { return sigma.eval(r, 2); }, 0.0, 2.0);
  CHECK(sup1 == doctest::Approx(oracle1).epsilon(1e-6));
  CHECK(sup2 == doctest::Approx(oracle2).epsilon(1e-6));
  // closed forms: slope of the first blend at its right knot, curvature of the
  // second blend at its midpoint
  CHECK(sup1 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sup2 == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(sup1 >= sigma.constants().slope);
}

TEST_CASE("linear gap bound") {
  // entirely linear within the radius: gap is zero
  SaturationConstants sharp;
  sharp.level = 2.0;
  sharp.linear_end = 2.0;
  sharp.flat_start = 2.0;
  sharp.slope = 1.0;
  sharp.order = 0;
  const auto lin = make_smooth_saturation(0, sharp);
  CHECK(linear_gap_bound(lin, 0.0) == doctest::Approx(0.0));

  // chain-shaped link (2/5, 1/5, 2/5, 1) with preceding plateau 1/12
  const auto mu2 = rescale(reference_quartic(), 0.4, 0.2);
  const double prev = 1.0 / 12.0;
  const double got = linear_gap_bound(mu2, prev);
  const double radius = mu2.constants().flat_start + 2.0 * prev;
  const double oracle =
      sampled_sup([&](double r) { return r - mu2.value(r); }, 0.0, radius, 2000000);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(got == doctest::Approx(1.0 / 6.0).epsilon(1e-12)); // radius endpoint dominates
  CHECK(got >= std::abs(radius - mu2.constants().level) - 1e-12);
}

TEST_CASE("secant bounds") {
  const auto sigma = reference_quartic();
  const auto s = secant_bounds(sigma, 0.0);
  const double oracle_sup =
      sampled_max([&](double r) { return sigma.value(r) / r; }, 1e-6, 2.0, 2000000);
  CHECK(s.sup == doctest::Approx(oracle_sup).epsilon(1e-6));
  CHECK(s.sup == doctest::Approx(10.0 / 9.0).epsilon(1e-12)); // attained at r = 5/3
  CHECK(s.inf == doctest::Approx(1.0).epsilon(1e-12));        // attained on the linear zone and at r = 2
  CHECK(s.inf_clamped == doctest::Approx(1.0).epsilon(1e-12));

  const auto clamped = secant_bounds(sigma, 0.4);
  CHECK(clamped.inf_clamped == doctest::Approx(2.0 / (2.0 + 0.8)).epsilon(1e-12)); // 5/7
  CHECK(0.0 < clamped.inf_clamped);
  CHECK(clamped.inf_clamped <= clamped.inf);
  CHECK(clamped.inf <= clamped.sup);
}

TEST_CASE("rescale: constants, identity, chain rule") {
  const auto sigma = reference_quartic();

  const auto same = rescale(sigma, sigma.constants().level, sigma.constants().linear_end);
  for (double r : {0.3, 1.2, 1.8, 2.5}) CHECK(same.value(r) == doctest::Approx(sigma.value(r)));

  const auto mu2 = rescale(sigma, 2.0 / 5.0, 1.0 / 5.0);
  CHECK(mu2.constants().flat_start == doctest::Approx(2.0 / 5.0));
  CHECK(mu2.constants().slope == doctest::Approx(1.0));
  CHECK(mu2.value(0.1) == doctest::Approx(0.1));
  CHECK(mu2.value(1.0) == doctest::Approx(0.4));

  // derivative chain rule: sup |g^(j)| = vf * stretch^-j * sup |f^(j)|
  const double vf = 0.4 / 2.0;
  const double stretch = 0.2 / 1.0;
  for (int j = 1; j <= 2; ++j) {
    const double expected = vf * std::pow(1.0 / stretch, j) * derivative_sup(sigma, j);
    CHECK(derivative_sup(mu2, j) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("outer-link scalings in the linearity width") {
  // Scaling the outermost link to (amplitude, lambda) divides the secant
  // bounds by lambda and the j-th derivative bound by lambda^j.
  const auto sigma = reference_quartic();
  const double amplitude = 2.0;
  const double prev = 2.0 / 5.0;
  const auto unit = rescale(sigma, amplitude, 1.0);
  const auto unit_sec = secant_bounds(unit, prev);
  const double alpha_unit = unit.constants().slope;
  CHECK(alpha_unit ==
        doctest::Approx(amplitude * sigma.constants().linear_end * sigma.constants().slope /
                        sigma.constants().level));

  const auto base_sec = secant_bounds(sigma, prev);
  for (double lambda : {1.0, 2.0, 6.5, 20.0}) {
    CAPTURE(lambda);
    const auto mu_n = rescale(sigma, amplitude, lambda);
    const auto sec = secant_bounds(mu_n, prev);
    const double expected_sup =
        alpha_unit * base_sec.sup / (lambda * sigma.constants().slope);
    const double expected_inf =
        alpha_unit * base_sec.inf / (lambda * sigma.constants().slope);
    const double s_over_l = sigma.constants().flat_start / sigma.constants().linear_end;
    const double expected_clamp =
        std::min(alpha_unit * base_sec.inf / sigma.constants().slope,
                 amplitude / (s_over_l + 2.0 * prev / lambda)) /
        lambda;
    CHECK(sec.sup == doctest::Approx(expected_sup).epsilon(1e-9));
    CHECK(sec.inf == doctest::Approx(expected_inf).epsilon(1e-9));
    CHECK(sec.inf_clamped == doctest::Approx(expected_clamp).epsilon(1e-9));
    for (int j = 1; j <= 2; ++j) {
      const double expected = derivative_sup(unit, j) / std::pow(lambda, j);
      CHECK(derivative_sup(mu_n, j) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("analysis struct collects the derived scalars") {
  const auto sigma = reference_quartic();
  const auto a = analyze(sigma, 0.4, 2);
  CHECK(a.deriv_sup.size() == 2);
  CHECK(a.deriv_sup[0] == doctest::Approx(1.5));
  CHECK(a.deriv_sup[1] == doctest::Approx(4.5));
  CHECK(a.deriv_sup[0] >= a.constants.slope);
  CHECK(a.secant_inf > 0.0);
  CHECK(a.secant_inf <= a.secant_sup);
  CHECK(a.secant_inf_clamped <= a.secant_inf);
  CHECK(a.linear_gap >= 0.0);
  CHECK(a.context_prev_max == doctest::Approx(0.4));
  CHECK_THROWS_AS((analyze(sigma, 0.0, 5)), std::invalid_argument);
}
