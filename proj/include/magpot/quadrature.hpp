#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "magpot/geometry.hpp"

namespace magpot {

/// Tensor Gauss-Legendre rule with adaptive bisection.
///
/// A region's error is the difference between the rule on the region and the
/// rule on its eight children (two-level Richardson comparison). The region
/// with the largest error is split until, for every component c,
///   sum(err_c) <= max(rtol * |I_c|, rtol * cancellation_floor * L1_c)
/// where L1_c = integral |integrand_c|. The second term lets integrals that
/// cancel to zero (invisible fields) converge.
struct QuadratureSpec {
  int order = 6;
  double rtol = 1e-10;
  int max_depth = 90;  // single-axis bisections
  double cancellation_floor = 1e-3;
  std::size_t max_regions = 200000;
};

/// One point of a chart: its image in space and the field value there
/// multiplied by the chart's Jacobian determinant.
struct ChartSample {
  Vec3 point;
  Vec3 weighted_value;
};

/// Parametrization of a piece of a field's support by an axis-aligned
/// parameter box.
struct Chart {
  Box domain;
  std::function<ChartSample(const Vec3&)> sample;
};

struct CubatureResult {
  std::array<double, 3> value{};
  std::array<double, 3> magnitude{};  // integral of |component|
  std::array<double, 3> error{};
  std::size_t regions = 0;
  std::size_t evaluations = 0;
};

using ChartIntegrand = std::function<std::array<double, 3>(const ChartSample&)>;

/// Integrates `components` (1..3) scalar functions of the chart samples over
/// the union of charts. Throws QuadratureNotConverged when a region deeper
/// than max_depth would be needed or max_regions is exceeded.
CubatureResult integrate(std::span<const Chart> charts, const ChartIntegrand& integrand,
                         int components, const QuadratureSpec& spec);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

}  // namespace magpot
