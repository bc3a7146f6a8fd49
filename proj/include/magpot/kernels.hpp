#pragma once

#include <span>
#include <vector>

#include "magpot/geometry.hpp"

namespace magpot {

/// Constants of the Newtonian kernel in dimension d >= 3.
///
/// N(z) = 1 / (C_d |z|^(d-2)) with C_d = (d-2) * omega_d, omega_d the area of
/// the unit sphere. The forward kernel of the library is literally
/// grad N(z) = ((2-d)/C_d) z / |z|^d; every potential below carries this
/// sign, so P(v chi_B)(x) = v . grad_x  integral_B N(x-y) dy.
struct KernelConvention {
  int dimension = 3;

  double sphere_area() const;       // omega_d
  double newton_constant() const;   // C_d
  double gradient_factor() const;   // (2-d)/C_d

  static KernelConvention three_d() { return {3}; }
};

/// Identifier written next to exported matrices.
inline constexpr const char* kConventionTag = "gradN(x-y).f, gradN(z)=-z/(4 pi |z|^3)";

double newton_kernel(std::span<const double> x);
std::vector<double> grad_newton(std::span<const double> x);

// d = 3 fast paths.
double newton_kernel(const Vec3& x);
Vec3 grad_newton(const Vec3& x);

/// Potentials at x of the three unit magnetizations e_1, e_2, e_3 on box B,
/// i.e. the three forward-matrix entries of one cell. Defined everywhere:
/// edge and corner evaluations use the continuous limit of each corner term.
Vec3 prism_potential_basis(const Box& box, const Vec3& x);

/// P(m chi_B)(x) = integral_B grad N(x-y) . m dy (closed form, d = 3).
double prism_potential(const Box& box, const Vec3& m, const Vec3& x);

/// Newtonian potential integral_B 1/|x-y| dy of a unit-density box; used by
/// tests and the far-field check.
double prism_newton_integral(const Box& box, const Vec3& x);

/// Exterior potential of the ball B_r(0) magnetized uniformly with v,
/// -(r^d/d) (v . x)/|x|^d under the library convention (any d >= 3).
double ball_dipole_potential(double r, std::span<const double> v, std::span<const double> x);
double ball_dipole_potential(double r, const Vec3& v, const Vec3& x);

}  // namespace magpot
