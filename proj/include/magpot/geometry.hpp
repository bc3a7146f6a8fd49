#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace magpot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Axis-aligned rectangular parallelepiped [lo, hi] with lo < hi componentwise.
class Box {
 public:
  Box(const Vec3& lo, const Vec3& hi);

  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }

  Vec3 extent() const { return hi_ - lo_; }
  Vec3 center() const { return 0.5 * (lo_ + hi_); }
  double volume() const;
  double diameter() const { return extent().norm(); }

  /// Strict interior membership.
  bool contains_open(const Vec3& x) const;
  /// Closed membership.
  bool contains(const Vec3& x) const;
  /// Euclidean distance from x to the closed box (0 inside).
  double distance(const Vec3& x) const;
  /// Distance between two closed boxes (0 when they touch or overlap).
  double distance(const Box& other) const;

  Box translated(const Vec3& t) const { return Box(lo_ + t, hi_ + t); }

  bool operator==(const Box& other) const { return lo_ == other.lo_ && hi_ == other.hi_; }

  /// The fixed domain [-1/2, 1/2]^3.
  static Box unit_domain();

 private:
  Vec3 lo_;
  Vec3 hi_;
};

/// Intersection of the open boxes; empty when they share no interior.
std::optional<Box> intersect(const Box& a, const Box& b);

/// Cubic lattice of spacing 1/n on [-1/2, 1/2]^3. Cells are ordered
/// lexicographically in (i, j, k) with k fastest.
class Lattice {
 public:
  explicit Lattice(int n);

  int n() const { return n_; }
  double delta() const { return 1.0 / n_; }
  std::size_t cell_count() const;
  Box domain() const { return Box::unit_domain(); }

  std::size_t index(int i, int j, int k) const;
  std::array<int, 3> triple(std::size_t index) const;
  Box cell(std::size_t index) const;
  Vec3 cell_center(std::size_t index) const;

  bool operator==(const Lattice& other) const { return n_ == other.n_; }

 private:
  int n_;
};

Lattice build_lattice(int n);

/// Evaluation points on the boundary of the unit domain: the centers of a
/// k x k subdivision of each of the six faces, M = 6k^2, equal weights.
struct SurfaceGrid {
  int points_per_edge = 0;
  double weight = 0.0;  // |dOmega| / M
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // outward unit normal of the owning face

  std::size_t size() const { return points.size(); }
};

SurfaceGrid surface_grid(int k);

/// True when no grid point lies on a lattice plane in a face-tangential
/// coordinate. For face-center grids this holds iff v2(n) <= v2(k).
bool grid_avoids_lattice(const SurfaceGrid& grid, const Lattice& lattice);

/// Affine isometry x -> R x + t.
class RigidMotion {
 public:
  RigidMotion();
  RigidMotion(const Mat3& rotation, const Vec3& translation);

  static RigidMotion identity() { return RigidMotion(); }
  static RigidMotion translation(const Vec3& t);
  /// Rotation by `angle` radians about the unit axis through the origin.
  static RigidMotion rotation(const Vec3& axis, double angle);
  /// Exact signed permutation: row r of the linear part is signs[r] * e_{axes[r]}.
  static RigidMotion signed_permutation(const std::array<int, 3>& axes,
                                        const std::array<int, 3>& signs,
                                        const Vec3& translation = Vec3::Zero());

  const Mat3& linear() const { return rotation_; }
  const Vec3& offset() const { return translation_; }

  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }
  Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }
  RigidMotion inverse() const;
  RigidMotion compose(const RigidMotion& inner) const;

  /// True when the linear part is a signed permutation, so that boxes map to
  /// axis-aligned boxes.
  bool is_signed_permutation() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

Vec3 apply_motion(const RigidMotion& motion, const Vec3& x);
RigidMotion inverse_motion(const RigidMotion& motion);

}  // namespace magpot
