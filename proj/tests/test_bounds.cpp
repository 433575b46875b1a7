#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "satstack/bounds.hpp"

using namespace satstack;
using testing::reference_quartic;

namespace {

// The reference chain: inner links (1/12, 1/24) and (2/5, 1/5), outer link
// rescaled to amplitude 2 with linearity width lambda.
struct ReferenceChain {
  SaturationFunction sigma = reference_quartic();
  SaturationFunction mu1 = rescale(sigma, 1.0 / 12.0, 1.0 / 24.0);
  SaturationFunction mu2 = rescale(sigma, 2.0 / 5.0, 1.0 / 5.0);

  std::vector<SaturationAnalysis> analyses(double lambda, int p = 2) const {
    const auto mu3 = rescale(sigma, 2.0, lambda);
    return {analyze(mu1, 0.0, p), analyze(mu2, 1.0 / 12.0, p), analyze(mu3, 2.0 / 5.0, p)};
  }

  std::vector<SaturationAnalysis> inner(int p = 2) const {
    return {analyze(mu1, 0.0, p), analyze(mu2, 1.0 / 12.0, p)};
  }

  SaturationAnalysis outer_unit(int p = 2) const {
    return analyze(rescale(sigma, 2.0, 1.0), 2.0 / 5.0, p);
  }
};

// Exact rational coefficients of the reference-chain bounds, derived by hand
// from the recursion with the closed-form scalars (secant sup 10/9 at r = 5/3,
// derivative sups 3/2 and 9/2, link gap 1/6):
//   bound_1(lambda) = (17/4)/lambda   + (1079/160)/lambda^2
//   bound_2(lambda) = (269/12)/lambda + (30125/96)/lambda^2
//                   + (1508003/1920)/lambda^3 + (1164241/12800)/lambda^4
double reference_bound1(double lambda) { return (17.0 / 4.0) / lambda + (1079.0 / 160.0) / (lambda * lambda); }

double reference_bound2(double lambda) {
  const double w = 1.0 / lambda;
  return (269.0 / 12.0) * w + (30125.0 / 96.0) * w * w + (1508003.0 / 1920.0) * w * w * w +
         (1164241.0 / 12800.0) * w * w * w * w;
}

} // namespace

TEST_CASE("one-step composition estimate") {
  // k = 1: ambient + sup * bound
  CHECK(composed_derivative_bound(2.0, std::vector<double>{3.0}, std::vector<double>{1.5}) ==
        doctest::Approx(2.0 + 1.5 * 3.0));
  // k = 2 with unit derivative sups: B_{2,1}(2,3) + B_{2,2}(2) = 3 + 4
  CHECK(composed_derivative_bound(0.0, std::vector<double>{2.0, 3.0},
                                  std::vector<double>{1.0, 1.0}) == doctest::Approx(7.0));
  // zero argument bounds collapse to the ambient bound
  CHECK(composed_derivative_bound(5.0, std::vector<double>{0.0, 0.0},
                                  std::vector<double>{9.0, 9.0}) == doctest::Approx(5.0));
  CHECK_THROWS_AS((composed_derivative_bound(0.0, std::vector<double>{1.0},
                                            std::vector<double>{1.0, 1.0})),
                  std::invalid_argument);

  // monotone in every argument
  const std::vector<double> q{1.0, 2.0, 0.5};
  const std::vector<double> s{1.0, 0.5, 2.0};
  const double base = composed_derivative_bound(1.0, q, s);
  CHECK(composed_derivative_bound(2.0, q, s) >= base);
  CHECK(composed_derivative_bound(1.0, std::vector<double>{1.5, 2.0, 0.5}, s) >= base);
  CHECK(composed_derivative_bound(1.0, q, std::vector<double>{1.0, 1.0, 2.0}) >= base);
}

TEST_CASE("single-link chain degenerates as expected") {
  const auto sigma = reference_quartic();
  const auto mu = rescale(sigma, 1.0, 3.0);
  const std::vector<SaturationAnalysis> chain{analyze(mu, 0.0, 1)};
  const auto t = compute_bound_tables(chain, 1);
  CHECK(t.Y[1][1] == doctest::Approx(mu.constants().level));
  CHECK(t.Z[1][1] == doctest::Approx(t.Y[1][1]));
  CHECK(t.G[1][1] == doctest::Approx(t.Z[1][1]));
  CHECK(t.u_bound[1] == doctest::Approx(chain[0].deriv_sup[0] * mu.constants().level));
}

TEST_CASE("reference chain reproduces the hand-derived rational bounds") {
  const ReferenceChain ref;
  for (double lambda : {1.0, 2.0, 6.5, 10.0}) {
    CAPTURE(lambda);
    const auto t = compute_bound_tables(ref.analyses(lambda), 2);
    CHECK(t.u_bound[1] == doctest::Approx(reference_bound1(lambda)).epsilon(1e-9));
    CHECK(t.u_bound[2] == doctest::Approx(reference_bound2(lambda)).epsilon(1e-9));
    // structural identities of the recursion
    CHECK(t.Z[1][1] == doctest::Approx(t.Y[1][1]));
    CHECK(t.Z[1][2] == doctest::Approx(t.Y[1][2]));
    CHECK(t.G[1][1] == doctest::Approx(t.Z[3][1]));
    for (int i = 1; i <= t.n; ++i)
      for (int j = 1; j <= t.p; ++j) {
        CHECK(std::isfinite(t.Y[i][j]));
        CHECK(t.Y[i][j] >= 0.0);
        CHECK(t.Z[i][j] >= 0.0);
      }
  }
}

TEST_CASE("lambda polynomial matches direct tables and is monotone") {
  const ReferenceChain ref;
  const auto polys = lambda_bound_polynomials(ref.inner(), ref.outer_unit(), 2);
  REQUIRE(polys.size() == 2);

  for (double lambda : {1.0, 1.5, 3.0, 6.5, 20.0}) {
    CAPTURE(lambda);
    const auto t = compute_bound_tables(ref.analyses(lambda), 2);
    for (int j = 1; j <= 2; ++j)
      CHECK(polys[j - 1].eval(lambda) ==
            doctest::Approx(t.u_bound[j]).epsilon(1e-9));
  }

  // first-order coefficients are the hand-derived rationals
  REQUIRE(polys[0].primary().coeffs().size() == 2);
  CHECK(polys[0].primary().coeffs()[0] == doctest::Approx(17.0 / 4.0).epsilon(1e-9));
  CHECK(polys[0].primary().coeffs()[1] == doctest::Approx(1079.0 / 160.0).epsilon(1e-9));

  // nonnegative coefficients and nonincreasing evaluation on a log grid
  for (const auto& lbp : polys) {
    for (double c : lbp.primary().coeffs()) CHECK(c >= -1e-15);
    double prev = lbp.eval(1.0);
    for (double lambda = 1.0; lambda <= 1024.0; lambda *= 2.0) {
      const double cur = lbp.eval(lambda);
      CHECK(cur <= prev * (1.0 + 1e-12));
      prev = cur;
    }
  }
}

TEST_CASE("lambda polynomial handles a clamp-branch switch inside lambda >= 1") {
  // A saturation whose secant dips below level/flat_start makes the clamped
  // infimum branch-dependent; the branch flips near lambda = 8.55 here.
  SaturationConstants c;
  c.level = 2.0;
  c.linear_end = 1.0;
  c.flat_start = 2.0;
  c.slope = 0.95;
  c.order = 2;
  const auto dip = make_smooth_saturation(2, c);

  const double inner_level = 0.45;
  const double inner_linear = inner_level * c.linear_end * c.slope / c.level;
  const auto mu1 = rescale(dip, inner_level, inner_linear);
  const std::vector<SaturationAnalysis> inner{analyze(mu1, 0.0, 2)};
  const auto outer_unit = analyze(rescale(dip, 2.0, 1.0), inner_level, 2);

  const auto polys = lambda_bound_polynomials(inner, outer_unit, 2);
  REQUIRE(polys.size() == 2);
  if (polys[0].switch_w > 0.0) {
    CHECK(1.0 / polys[0].switch_w > 1.0); // the flip is inside the usable range
  }

  for (double lambda : {1.0, 1.5, 3.0, 6.5, 20.0, 40.0}) {
    CAPTURE(lambda);
    const auto mu2 = rescale(dip, 2.0, lambda);
    const std::vector<SaturationAnalysis> chain{inner[0], analyze(mu2, inner_level, 2)};
    const auto t = compute_bound_tables(chain, 2);
    for (int j = 1; j <= 2; ++j)
      CHECK(polys[j - 1].eval(lambda) == doctest::Approx(t.u_bound[j]).epsilon(1e-9));
  }
}

TEST_CASE("table input validation") {
  const ReferenceChain ref;
  auto chain = ref.analyses(2.0, 2);
  CHECK_THROWS_AS((compute_bound_tables(std::vector<SaturationAnalysis>{}, 2)),
                  std::invalid_argument);
  // outer context must match the preceding plateau
  chain[2].context_prev_max = 0.1;
  CHECK_THROWS_AS((compute_bound_tables(chain, 2)), std::invalid_argument);
  // missing derivative data
  auto shallow = ref.analyses(2.0, 1);
  CHECK_THROWS_AS((compute_bound_tables(shallow, 2)), std::invalid_argument);
}
