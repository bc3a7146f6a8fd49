#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magpot/errors.hpp"
#include "magpot/quadrature.hpp"
#include "oracles.hpp"

using namespace magpot;

namespace {

Chart identity_chart(const Box& b) {
  return Chart{b, [](const Vec3& p) { return ChartSample{p, Vec3::Ones()}; }};
}

}  // namespace

TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1") {
  for (int n : {1, 2, 5, 12, 32}) {
    const GaussRule& r = gauss_legendre(n);
    double w = 0.0, top = 0.0;
    for (int i = 0; i < n; ++i) {
      w += r.weights[i];
      top += r.weights[i] * std::pow(r.nodes[i], 2 * n - 2);
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(top == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre(0), InvalidInput);
  CHECK_THROWS_AS(gauss_legendre(33), InvalidInput);
}

TEST_CASE("polynomials and smooth functions over boxes") {
  const Box b(Vec3(0, 0, 0), Vec3(1, 2, 3));
  const Chart charts[] = {identity_chart(b)};
  const auto r = integrate(
      charts,
      [](const ChartSample& s) {
        const Vec3& p = s.point;
        return std::array<double, 3>{1.0, p[0] * p[1] * p[2], std::exp(p[0] + p[1] + p[2])};
      },
      3, QuadratureSpec{});
  const double e = std::exp(1.0);
  CHECK(r.value[0] == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(r.value[1] == doctest::Approx(0.5 * 2 * 4.5).epsilon(1e-14));
  CHECK(r.value[2] == doctest::Approx((e - 1) * (e * e - 1) * (e * e * e - 1)).epsilon(1e-11));
  CHECK(r.magnitude[0] == doctest::Approx(6.0));
}

TEST_CASE("near-singular integrand is resolved adaptively") {
  // integral over [0,1]^3 of 1/|y - x|, x just outside the corner
  const Vec3 x(-1e-3, -1e-3, -1e-3);
  const Chart charts[] = {identity_chart(Box(Vec3::Zero(), Vec3::Ones()))};
  QuadratureSpec spec;
  spec.rtol = 1e-10;
  const auto near = integrate(
      charts, [&x](const ChartSample& s) { return std::array<double, 3>{1.0 / (s.point - x).norm(), 0, 0}; },
      1, spec);
  CHECK(near.value[0] == doctest::Approx(oracle::newton_integral(Vec3::Zero(), Vec3::Ones(), x)).epsilon(1e-9));
  CHECK(near.regions > 1);
}

TEST_CASE("cancelling integrals converge through the magnitude floor") {
  const Chart charts[] = {identity_chart(Box(Vec3::Constant(-1), Vec3::Constant(1)))};
  const auto r = integrate(
      charts, [](const ChartSample& s) { return std::array<double, 3>{std::sin(3 * s.point[0]) * s.point[1], 0, 0}; },
      1, QuadratureSpec{});
  CHECK(std::abs(r.value[0]) < 1e-14);
}

TEST_CASE("non-convergence is reported") {
  const Chart charts[] = {identity_chart(Box(Vec3::Zero(), Vec3::Ones()))};
  QuadratureSpec spec;
  spec.max_regions = 3;
  spec.rtol = 1e-14;
  const Vec3 x(-1e-6, 0.5, 0.5);
  CHECK_THROWS_AS(integrate(
                      charts,
                      [&x](const ChartSample& s) {
                        const double r = (s.point - x).norm();
                        return std::array<double, 3>{1.0 / (r * r), 0, 0};
                      },
                      1, spec),
                  QuadratureNotConverged);
}

TEST_CASE("multiple charts add") {
  const Chart charts[] = {identity_chart(Box(Vec3::Zero(), Vec3::Ones())),
                          identity_chart(Box(Vec3(2, 0, 0), Vec3(3, 1, 2)))};
  const auto r = integrate(charts, [](const ChartSample&) { return std::array<double, 3>{1.0, 0, 0}; }, 1,
                           QuadratureSpec{});
  CHECK(r.value[0] == doctest::Approx(3.0).epsilon(1e-14));
}
