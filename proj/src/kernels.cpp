#include "magpot/kernels.hpp"

#include <cmath>
#include <numbers>

#include "magpot/errors.hpp"

namespace magpot {

namespace {

using std::numbers::pi;

int checked_dimension(std::size_t size) {
  if (size < 3) throw InvalidInput("Newtonian kernel requires dimension >= 3");
  return static_cast<int>(size);
}

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// log(c + r) with r = sqrt(a^2 + b^2 + c^2), free of cancellation for c < 0.
double log_c_plus_r(double a, double b, double c, double r) {
  if (c >= 0.0) return std::log(c + r);
  return std::log((a * a + b * b) / (r - c));
}

// Antiderivative of integral u1/|u|^3 du (up to sign): the corner term
//   u2 ln(u3 + r) + u3 ln(u2 + r) - u1 atan(u2 u3 / (u1 r)).
// A zero coefficient makes its term vanish, which is the continuous limit on
// edges and corners.
double corner_term(double u1, double u2, double u3) {
  const double r = std::sqrt(u1 * u1 + u2 * u2 + u3 * u3);
  if (r == 0.0) return 0.0;
  double t = 0.0;
  if (u2 != 0.0) t += u2 * log_c_plus_r(u1, u2, u3, r);
  if (u3 != 0.0) t += u3 * log_c_plus_r(u1, u3, u2, r);
  if (u1 != 0.0) t -= u1 * std::atan(u2 * u3 / (u1 * r));
  return t;
}

// Antiderivative of 1/|u| over three variables.
double newton_corner_term(double u1, double u2, double u3) {
  const double r = std::sqrt(u1 * u1 + u2 * u2 + u3 * u3);
  if (r == 0.0) return 0.0;
  double t = 0.0;
  if (u1 != 0.0 && u2 != 0.0) t += u1 * u2 * log_c_plus_r(u1, u2, u3, r);
  if (u2 != 0.0 && u3 != 0.0) t += u2 * u3 * log_c_plus_r(u2, u3, u1, r);
  if (u3 != 0.0 && u1 != 0.0) t += u3 * u1 * log_c_plus_r(u3, u1, u2, r);
  if (u1 != 0.0) t -= 0.5 * u1 * u1 * std::atan(u2 * u3 / (u1 * r));
  if (u2 != 0.0) t -= 0.5 * u2 * u2 * std::atan(u3 * u1 / (u2 * r));
  if (u3 != 0.0) t -= 0.5 * u3 * u3 * std::atan(u1 * u2 / (u3 * r));
  return t;
}

void require_finite(const Vec3& x) {
  if (!x.allFinite()) throw InvalidInput("evaluation point must be finite");
}

}  // namespace

double KernelConvention::sphere_area() const {
  if (dimension < 3) throw InvalidInput("Newtonian kernel requires dimension >= 3");
  const double d = dimension;
  return 2.0 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0);
}

double KernelConvention::newton_constant() const { return (dimension - 2) * sphere_area(); }

double KernelConvention::gradient_factor() const { return (2.0 - dimension) / newton_constant(); }

double newton_kernel(std::span<const double> x) {
  const KernelConvention conv{checked_dimension(x.size())};
  const double r2 = squared_norm(x);
  if (r2 == 0.0) throw InvalidInput("Newtonian kernel is singular at the origin");
  return 1.0 / (conv.newton_constant() * std::pow(std::sqrt(r2), conv.dimension - 2));
}

std::vector<double> grad_newton(std::span<const double> x) {
  const KernelConvention conv{checked_dimension(x.size())};
  const double r2 = squared_norm(x);
  if (r2 == 0.0) throw InvalidInput("Newtonian kernel gradient is singular at the origin");
  const double scale = conv.gradient_factor() / std::pow(std::sqrt(r2), conv.dimension);
  std::vector<double> g(x.begin(), x.end());
  for (double& v : g) v *= scale;
  return g;
}

double newton_kernel(const Vec3& x) {
  const double r = x.norm();
  if (r == 0.0) throw InvalidInput("Newtonian kernel is singular at the origin");
  return 1.0 / (4.0 * pi * r);
}

Vec3 grad_newton(const Vec3& x) {
  const double r = x.norm();
  if (r == 0.0) throw InvalidInput("Newtonian kernel gradient is singular at the origin");
  return x * (-1.0 / (4.0 * pi * r * r * r));
}

Vec3 prism_potential_basis(const Box& box, const Vec3& x) {
  require_finite(x);
  // u = y - x at the corners; sign +1 for the upper bound in each axis.
  const Vec3 lo = box.lo() - x;
  const Vec3 hi = box.hi() - x;
  Vec3 sum = Vec3::Zero();
  for (int c = 0; c < 8; ++c) {
    Vec3 u;
    double sign = 1.0;
    for (int a = 0; a < 3; ++a) {
      const bool upper = (c >> a) & 1;
      u[a] = upper ? hi[a] : lo[a];
      if (!upper) sign = -sign;
    }
    sum[0] += sign * corner_term(u[0], u[1], u[2]);
    sum[1] += sign * corner_term(u[1], u[2], u[0]);
    sum[2] += sign * corner_term(u[2], u[0], u[1]);
  }
  // d/dx_a integral_B 1/|x-y| dy = -sum[a]; P = (1/(4 pi)) m . grad_x of it.
  return -sum / (4.0 * pi);
}

double prism_potential(const Box& box, const Vec3& m, const Vec3& x) {
  return m.dot(prism_potential_basis(box, x));
}

double prism_newton_integral(const Box& box, const Vec3& x) {
  require_finite(x);
  const Vec3 lo = box.lo() - x;
  const Vec3 hi = box.hi() - x;
  double sum = 0.0;
  for (int c = 0; c < 8; ++c) {
    Vec3 u;
    double sign = 1.0;
    for (int a = 0; a < 3; ++a) {
      const bool upper = (c >> a) & 1;
      u[a] = upper ? hi[a] : lo[a];
      if (!upper) sign = -sign;
    }
    sum += sign * newton_corner_term(u[0], u[1], u[2]);
  }
  return sum;
}

double ball_dipole_potential(double r, std::span<const double> v, std::span<const double> x) {
  const int d = checked_dimension(x.size());
  if (v.size() != x.size()) throw DimensionMismatch("magnetization and point dimensions differ");
  if (!(r > 0.0)) throw InvalidInput("ball radius must be positive");
  const double norm = std::sqrt(squared_norm(x));
  if (!(norm > r)) throw InvalidInput("ball dipole potential is defined only for |x| > r");
  double vx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) vx += v[i] * x[i];
  // vol(B_r) * ((2-d)/C_d) = -(r^d / d)
  return -(std::pow(r, d) / d) * vx / std::pow(norm, d);
}

double ball_dipole_potential(double r, const Vec3& v, const Vec3& x) {
  return ball_dipole_potential(r, std::span<const double>(v.data(), 3),
                               std::span<const double>(x.data(), 3));
}

}  // namespace magpot
