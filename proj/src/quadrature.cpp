#include "magpot/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <queue>
#include <string>

#include "magpot/errors.hpp"

namespace magpot {

namespace {

constexpr int kMaxOrder = 32;

GaussRule compute_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

struct RuleValue {
  std::array<double, 3> value{};
  std::array<double, 3> magnitude{};
};

RuleValue apply_rule(const Chart& chart, const Box& region, const ChartIntegrand& integrand,
                     int components, const GaussRule& rule) {
  RuleValue out;
  const Vec3 center = region.center();
  const Vec3 half = 0.5 * region.extent();
  const double scale = half[0] * half[1] * half[2];
  const int q = static_cast<int>(rule.nodes.size());
  for (int a = 0; a < q; ++a) {
    for (int b = 0; b < q; ++b) {
      for (int c = 0; c < q; ++c) {
        const Vec3 s(center[0] + half[0] * rule.nodes[a], center[1] + half[1] * rule.nodes[b],
                     center[2] + half[2] * rule.nodes[c]);
        const double w = scale * rule.weights[a] * rule.weights[b] * rule.weights[c];
        const auto f = integrand(chart.sample(s));
        for (int k = 0; k < components; ++k) {
          out.value[k] += w * f[k];
          out.magnitude[k] += w * std::abs(f[k]);
        }
      }
    }
  }
  return out;
}

std::array<Box, 2> halves(const Box& box, int axis) {
  const double mid = box.center()[axis];
  Vec3 upper_lo = box.lo(), lower_hi = box.hi();
  upper_lo[axis] = mid;
  lower_hi[axis] = mid;
  return {Box(box.lo(), lower_hi), Box(upper_lo, box.hi())};
}

struct Region {
  Box box;
  std::size_t chart;
  int depth;
  int axis;  // bisection direction for the next refinement
  bool live;
  std::array<double, 3> value;
  std::array<double, 3> magnitude;
  std::array<double, 3> error;
};

// Compares the rule on the box with the rule on its two halves along each
// axis. The region is refined along the axis where halving changes the most,
// so integrands varying in one direction cost a factor 4 less per level than
// octree refinement.
Region evaluate_region(const std::span<const Chart> charts, std::size_t chart, const Box& box,
                       int depth, const ChartIntegrand& integrand, int components,
                       const GaussRule& rule) {
  const RuleValue coarse = apply_rule(charts[chart], box, integrand, components, rule);
  Region r{box, chart, depth, 0, true, coarse.value, coarse.magnitude, {}};
  double best = -1.0;
  for (int a = 0; a < 3; ++a) {
    RuleValue fine;
    for (const Box& half : halves(box, a)) {
      const RuleValue part = apply_rule(charts[chart], half, integrand, components, rule);
      for (int k = 0; k < components; ++k) {
        fine.value[k] += part.value[k];
        fine.magnitude[k] += part.magnitude[k];
      }
    }
    double change = 0.0;
    for (int k = 0; k < components; ++k) {
      const double d = std::abs(fine.value[k] - coarse.value[k]);
      r.error[k] = std::max(r.error[k], d);
      change = std::max(change, d / std::max(coarse.magnitude[k], std::numeric_limits<double>::min()));
    }
    if (change > best) {
      best = change;
      r.axis = a;
      r.value = fine.value;
      r.magnitude = fine.magnitude;
    }
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > kMaxOrder) {
    throw InvalidInput("Gauss-Legendre order must lie in [1, " + std::to_string(kMaxOrder) + "]");
  }
  static std::once_flag once;
  static std::vector<GaussRule> rules;
  std::call_once(once, [] {
    rules.reserve(kMaxOrder + 1);
    rules.emplace_back();
    for (int n = 1; n <= kMaxOrder; ++n) rules.push_back(compute_rule(n));
  });
  return rules[order];
}

CubatureResult integrate(std::span<const Chart> charts, const ChartIntegrand& integrand,
                         int components, const QuadratureSpec& spec) {
  if (components < 1 || components > 3) throw InvalidInput("components must lie in [1, 3]");
  if (!(spec.rtol > 0.0)) throw InvalidInput("quadrature rtol must be positive");
  const GaussRule& rule = gauss_legendre(spec.order);
  const std::size_t evals_per_region = 7 * rule.nodes.size() * rule.nodes.size() * rule.nodes.size();

  std::vector<Region> regions;
  for (std::size_t c = 0; c < charts.size(); ++c) {
    regions.push_back(evaluate_region(charts, c, charts[c].domain, 0, integrand, components, rule));
  }

  std::array<double, 3> total{}, magnitude{}, error{};
  auto recompute = [&] {
    total = {};
    magnitude = {};
    error = {};
    for (const Region& r : regions) {
      if (!r.live) continue;
      for (int k = 0; k < components; ++k) {
        total[k] += r.value[k];
        magnitude[k] += r.magnitude[k];
        error[k] += r.error[k];
      }
    }
  };
  recompute();

  // Priorities are normalized by the initial magnitudes so components of
  // different size compete fairly.
  std::array<double, 3> norm{};
  for (int k = 0; k < components; ++k) norm[k] = magnitude[k] > 0.0 ? magnitude[k] : 1.0;
  auto priority = [&](const Region& r) {
    double p = 0.0;
    for (int k = 0; k < components; ++k) p = std::max(p, r.error[k] / norm[k]);
    return p;
  };
  auto converged = [&] {
    for (int k = 0; k < components; ++k) {
      const double tol =
          std::max(spec.rtol * std::abs(total[k]), spec.rtol * spec.cancellation_floor * magnitude[k]);
      if (error[k] > tol) return false;
    }
    return true;
  };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> queue;
  for (std::size_t i = 0; i < regions.size(); ++i) queue.emplace(priority(regions[i]), i);

  std::size_t splits = 0;
  while (!converged()) {
    if (queue.empty()) break;
    const std::size_t idx = queue.top().second;
    queue.pop();
    if (regions[idx].depth >= spec.max_depth) {
      throw QuadratureNotConverged("quadrature tolerance not reached before max depth " +
                                   std::to_string(spec.max_depth));
    }
    if (regions.size() + 2 > spec.max_regions) {
      throw QuadratureNotConverged("quadrature tolerance not reached within " +
                                   std::to_string(spec.max_regions) + " regions");
    }
    const Region parent = regions[idx];
    regions[idx].live = false;
    for (int k = 0; k < components; ++k) {
      total[k] -= parent.value[k];
      magnitude[k] -= parent.magnitude[k];
      error[k] -= parent.error[k];
    }
    for (const Box& child : halves(parent.box, parent.axis)) {
      regions.push_back(evaluate_region(charts, parent.chart, child, parent.depth + 1, integrand,
                                        components, rule));
      const Region& r = regions.back();
      for (int k = 0; k < components; ++k) {
        total[k] += r.value[k];
        magnitude[k] += r.magnitude[k];
        error[k] += r.error[k];
      }
      queue.emplace(priority(r), regions.size() - 1);
    }
    // Running sums drift; refresh them periodically.
    if (++splits % 64 == 0) recompute();
  }
  recompute();

  CubatureResult result;
  result.value = total;
  result.magnitude = magnitude;
  result.error = error;
  result.regions = regions.size();
  result.evaluations = regions.size() * evals_per_region;
  return result;
}

}  // namespace magpot
