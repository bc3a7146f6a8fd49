#include "magpot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magpot/errors.hpp"

namespace magpot {

namespace {

// Lattice plane coordinate; both neighbours of a plane use the same value so
// cells tile the domain without gaps.
double lattice_plane(int i, int n) { return -0.5 + static_cast<double>(i) / n; }

bool finite(const Vec3& x) { return x.allFinite(); }

}  // namespace

Box::Box(const Vec3& lo, const Vec3& hi) : lo_(lo), hi_(hi) {
  if (!finite(lo) || !finite(hi)) throw InvalidInput("box corners must be finite");
  for (int k = 0; k < 3; ++k) {
    if (!(lo[k] < hi[k])) throw InvalidInput("box requires lo < hi componentwise");
  }
}

double Box::volume() const {
  const Vec3 e = extent();
  return e[0] * e[1] * e[2];
}

bool Box::contains_open(const Vec3& x) const {
  for (int k = 0; k < 3; ++k) {
    if (!(x[k] > lo_[k] && x[k] < hi_[k])) return false;
  }
  return true;
}

bool Box::contains(const Vec3& x) const {
  for (int k = 0; k < 3; ++k) {
    if (x[k] < lo_[k] || x[k] > hi_[k]) return false;
  }
  return true;
}

double Box::distance(const Vec3& x) const {
  Vec3 gap;
  for (int k = 0; k < 3; ++k) gap[k] = std::max({lo_[k] - x[k], 0.0, x[k] - hi_[k]});
  return gap.norm();
}

double Box::distance(const Box& other) const {
  Vec3 gap;
  for (int k = 0; k < 3; ++k) {
    gap[k] = std::max({other.lo_[k] - hi_[k], 0.0, lo_[k] - other.hi_[k]});
  }
  return gap.norm();
}

Box Box::unit_domain() { return Box(Vec3::Constant(-0.5), Vec3::Constant(0.5)); }

std::optional<Box> intersect(const Box& a, const Box& b) {
  const Vec3 lo = a.lo().cwiseMax(b.lo());
  const Vec3 hi = a.hi().cwiseMin(b.hi());
  for (int k = 0; k < 3; ++k) {
    if (!(lo[k] < hi[k])) return std::nullopt;
  }
  return Box(lo, hi);
}

Lattice::Lattice(int n) : n_(n) {
  if (n < 1) throw InvalidInput("lattice resolution n must be >= 1, got " + std::to_string(n));
}

std::size_t Lattice::cell_count() const {
  const auto m = static_cast<std::size_t>(n_);
  return m * m * m;
}

std::size_t Lattice::index(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || i >= n_ || j >= n_ || k >= n_) {
    throw InvalidInput("lattice index out of range");
  }
  const auto m = static_cast<std::size_t>(n_);
  return (static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j)) * m +
         static_cast<std::size_t>(k);
}

std::array<int, 3> Lattice::triple(std::size_t index) const {
  if (index >= cell_count()) throw InvalidInput("lattice cell index out of range");
  const auto m = static_cast<std::size_t>(n_);
  return {static_cast<int>(index / (m * m)), static_cast<int>((index / m) % m),
          static_cast<int>(index % m)};
}

Box Lattice::cell(std::size_t index) const {
  const auto t = triple(index);
  Vec3 lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = lattice_plane(t[a], n_);
    hi[a] = lattice_plane(t[a] + 1, n_);
  }
  return Box(lo, hi);
}

Vec3 Lattice::cell_center(std::size_t index) const {
  const auto t = triple(index);
  Vec3 c;
  for (int a = 0; a < 3; ++a) c[a] = -0.5 + (t[a] + 0.5) / n_;
  return c;
}

Lattice build_lattice(int n) { return Lattice(n); }

SurfaceGrid surface_grid(int k) {
  if (k < 1) throw InvalidInput("surface grid needs k >= 1 points per edge");
  SurfaceGrid grid;
  grid.points_per_edge = k;
  const auto count = static_cast<std::size_t>(6) * k * k;
  grid.points.reserve(count);
  grid.normals.reserve(count);
  grid.weight = 6.0 / static_cast<double>(count);

  // Faces in the order -x, +x, -y, +y, -z, +z; tangential coordinates follow
  // the cyclic order (axis+1, axis+2).
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const double s = side == 0 ? -0.5 : 0.5;
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          Vec3 p;
          p[axis] = s;
          p[(axis + 1) % 3] = -0.5 + (a + 0.5) / k;
          p[(axis + 2) % 3] = -0.5 + (b + 0.5) / k;
          grid.points.push_back(p);
          Vec3 normal = Vec3::Zero();
          normal[axis] = side == 0 ? -1.0 : 1.0;
          grid.normals.push_back(normal);
        }
      }
    }
  }
  return grid;
}

bool grid_avoids_lattice(const SurfaceGrid& grid, const Lattice& lattice) {
  const int n = lattice.n();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Vec3& p = grid.points[j];
    const Vec3& normal = grid.normals[j];
    for (int axis = 0; axis < 3; ++axis) {
      if (normal[axis] != 0.0) continue;
      // nearest lattice plane
      const double scaled = (p[axis] + 0.5) * n;
      const double nearest = lattice_plane(static_cast<int>(std::lround(scaled)), n);
      if (std::abs(p[axis] - nearest) <= 1e-12) return false;
    }
  }
  return true;
}

RigidMotion::RigidMotion() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidMotion::RigidMotion(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidInput("rigid motion must be finite");
  }
  const double defect = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (defect > 1e-12) throw InvalidInput("rigid motion requires an orthogonal linear part");
}

RigidMotion RigidMotion::translation(const Vec3& t) { return RigidMotion(Mat3::Identity(), t); }

RigidMotion RigidMotion::rotation(const Vec3& axis, double angle) {
  if (!(axis.norm() > 0.0)) throw InvalidInput("rotation axis must be nonzero");
  const Mat3 r = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  return RigidMotion(r, Vec3::Zero());
}

RigidMotion RigidMotion::signed_permutation(const std::array<int, 3>& axes,
                                            const std::array<int, 3>& signs,
                                            const Vec3& translation) {
  Mat3 r = Mat3::Zero();
  for (int row = 0; row < 3; ++row) {
    if (axes[row] < 0 || axes[row] > 2 || (signs[row] != 1 && signs[row] != -1)) {
      throw InvalidInput("signed permutation needs axes in {0,1,2} and signs in {-1,1}");
    }
    r(row, axes[row]) = signs[row];
  }
  return RigidMotion(r, translation);
}

RigidMotion RigidMotion::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return RigidMotion(rt, -(rt * translation_));
}

RigidMotion RigidMotion::compose(const RigidMotion& inner) const {
  return RigidMotion(rotation_ * inner.rotation_, rotation_ * inner.translation_ + translation_);
}

bool RigidMotion::is_signed_permutation() const {
  for (int r = 0; r < 3; ++r) {
    int nonzero = 0;
    for (int c = 0; c < 3; ++c) {
      const double v = rotation_(r, c);
      if (v == 1.0 || v == -1.0) {
        ++nonzero;
      } else if (v != 0.0) {
        return false;
      }
    }
    if (nonzero != 1) return false;
  }
  return true;
}

Vec3 apply_motion(const RigidMotion& motion, const Vec3& x) { return motion.apply(x); }

RigidMotion inverse_motion(const RigidMotion& motion) { return motion.inverse(); }

}  // namespace magpot
