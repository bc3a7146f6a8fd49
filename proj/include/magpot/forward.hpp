#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magpot/fields.hpp"
#include "magpot/geometry.hpp"
#include "magpot/kernels.hpp"
#include "magpot/quadrature.hpp"

namespace magpot {

/// P(f)(x) for a box-simple field, summing closed-form prism potentials.
double potential(const BoxSimpleField& f, const Vec3& x);
double potential(const LatticeField& f, const Vec3& x);

struct QuadraturePotential {
  double value = 0.0;
  /// integral |grad N(x-y) . f(y)| dy: the potential a fully coherent field of
  /// the same magnitude would produce. Used as the scale of invisibility checks.
  double scale = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive quadrature of integral grad N(x-y) . f(y) dy over the charts.
/// Requires x at positive distance from the support.
QuadraturePotential potential_quadrature(const SmoothField& f, const Vec3& x,
                                         const QuadratureSpec& spec = {});
QuadraturePotential potential_quadrature(std::span<const Chart> charts, const Vec3& x,
                                         const QuadratureSpec& spec = {});

/// Dense M x 3N_delta matrix; column 3i+k holds P(e_{k+1} chi_{cell i}) at the
/// grid points.
struct ForwardMatrix {
  Eigen::MatrixXd entries;
  SurfaceGrid grid;
  Lattice lattice;
  std::string convention = kConventionTag;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

struct AssemblyLimits {
  /// Largest admissible M * 3N_delta (doubles). 2^27 entries = 1 GiB.
  std::size_t max_entries = std::size_t{1} << 27;
};

/// Rows are computed in parallel when OpenMP is available; each entry is
/// evaluated by the same fixed-order arithmetic, so results are bitwise
/// reproducible.
ForwardMatrix assemble(const Lattice& lattice, const SurfaceGrid& grid,
                       const AssemblyLimits& limits = {});

Eigen::VectorXd apply(const ForwardMatrix& P, const LatticeField& f);
/// sqrt(|dOmega| / M) * ||samples||_2.
double boundary_l2_norm(const Eigen::VectorXd& samples, const SurfaceGrid& grid);

/// f_U(x) = U^T f(U x) for a box-simple f. Parts are kept in the frame of f
/// and mapped through U^{-1} on evaluation.
class MovedField {
 public:
  MovedField(BoxSimpleField original, RigidMotion motion);

  const RigidMotion& motion() const { return motion_; }
  const BoxSimpleField& original() const { return original_; }

  /// Pointwise value U^T f(U x).
  Vec3 value(const Vec3& x) const;
  /// Available when the linear part of U is a signed permutation.
  std::optional<BoxSimpleField> as_box_simple() const;
  /// Charts over the moved boxes for the quadrature path.
  std::vector<Chart> charts() const;

 private:
  BoxSimpleField original_;
  RigidMotion motion_;
};

MovedField transform_field(const BoxSimpleField& f, const RigidMotion& motion);

/// P(f_U)(x): closed form for signed permutations, quadrature otherwise.
double potential(const MovedField& f, const Vec3& x, const QuadratureSpec& spec = {});

/// Column-major float64 dump plus a JSON sidecar <path>.json with shape,
/// delta, k and the convention tag.
void write_matrix_binary(const ForwardMatrix& P, const std::filesystem::path& path);
ForwardMatrix read_matrix_binary(const std::filesystem::path& path);
void write_matrix_csv(const ForwardMatrix& P, const std::filesystem::path& path);

}  // namespace magpot
