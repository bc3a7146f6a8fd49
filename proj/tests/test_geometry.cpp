#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>

#include "magpot/errors.hpp"
#include "magpot/geometry.hpp"

using namespace magpot;

TEST_CASE("box rejects degenerate and non-finite corners") {
  CHECK_THROWS_AS(Box(Vec3(0, 0, 0), Vec3(1, 0, 1)), InvalidInput);
  CHECK_THROWS_AS(Box(Vec3(1, 0, 0), Vec3(0, 1, 1)), InvalidInput);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Box(Vec3(nan, 0, 0), Vec3(1, 1, 1)), InvalidInput);
  CHECK_THROWS_AS(Box(Vec3(0, 0, 0), Vec3(1, 1, std::numeric_limits<double>::infinity())), InvalidInput);
}

TEST_CASE("box measures") {
  const Box b(Vec3(0, 0, 0), Vec3(1, 2, 3));
  CHECK(b.volume() == 6.0);
  CHECK(b.diameter() == doctest::Approx(std::sqrt(14.0)));
  CHECK(b.center() == Vec3(0.5, 1, 1.5));
  CHECK(b.contains(Vec3(1, 2, 3)));
  CHECK_FALSE(b.contains_open(Vec3(1, 1, 1)));
  CHECK(b.contains_open(Vec3(0.5, 1, 1)));
  CHECK(b.distance(Vec3(0.5, 1, 1)) == 0.0);
  CHECK(b.distance(Vec3(4, 6, 3)) == doctest::Approx(5.0));
  CHECK(b.distance(Box(Vec3(2, 0, 0), Vec3(3, 1, 1))) == doctest::Approx(1.0));
  CHECK(b.distance(Box(Vec3(1, 0, 0), Vec3(3, 1, 1))) == 0.0);
}

TEST_CASE("open intersection") {
  const Box a(Vec3(0, 0, 0), Vec3(1, 1, 1));
  CHECK_FALSE(intersect(a, Box(Vec3(1, 0, 0), Vec3(2, 1, 1))).has_value());  // shared face only
  CHECK_FALSE(intersect(a, Box(Vec3(3, 0, 0), Vec3(4, 1, 1))).has_value());
  const auto c = intersect(a, Box(Vec3(0.5, -1, 0.25), Vec3(2, 0.5, 0.75)));
  REQUIRE(c.has_value());
  CHECK(*c == Box(Vec3(0.5, 0, 0.25), Vec3(1, 0.5, 0.75)));
}

TEST_CASE("single-cell lattice is the domain") {
  const Lattice l(1);
  CHECK(l.cell_count() == 1);
  CHECK(l.cell(0) == Box::unit_domain());
  CHECK(l.cell_center(0) == Vec3::Zero());
}

TEST_CASE("lattice rejects n < 1") {
  CHECK_THROWS_AS(Lattice(0), InvalidInput);
  CHECK_THROWS_AS(Lattice(-3), InvalidInput);
}

TEST_CASE("lattice ordering is lexicographic with k fastest") {
  const Lattice l(3);
  CHECK(l.index(0, 0, 1) == 1);
  CHECK(l.index(0, 1, 0) == 3);
  CHECK(l.index(1, 0, 0) == 9);
  for (std::size_t c = 0; c < l.cell_count(); ++c) {
    const auto t = l.triple(c);
    CHECK(l.index(t[0], t[1], t[2]) == c);
  }
}

TEST_CASE("lattice cells tile the domain") {
  for (int n : {2, 3, 5}) {
    const Lattice l(n);
    double volume = 0.0;
    for (std::size_t c = 0; c < l.cell_count(); ++c) {
      const Box b = l.cell(c);
      volume += b.volume();
      CHECK(b.extent().isApprox(Vec3::Constant(l.delta()), 1e-14));
      CHECK(b.contains_open(l.cell_center(c)));
      // neighbours along k share a face exactly
      const auto t = l.triple(c);
      if (t[2] + 1 < n) CHECK(l.cell(c + 1).lo()[2] == b.hi()[2]);
    }
    CHECK(volume == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("cell planes are exact fractions") {
  const Lattice l(4);
  CHECK(l.cell(l.index(3, 0, 0)).lo()[0] == 0.25);
  CHECK(l.cell(l.index(0, 0, 0)).lo()[0] == -0.5);
  CHECK(l.cell(l.index(3, 3, 3)).hi()[2] == 0.5);
}

TEST_CASE("surface grid: counts, weights, placement") {
  for (int k : {1, 3, 10}) {
    const SurfaceGrid g = surface_grid(k);
    CHECK(g.size() == static_cast<std::size_t>(6 * k * k));
    CHECK(g.weight == doctest::Approx(1.0 / (k * k)));
    CHECK(g.weight * static_cast<double>(g.size()) == doctest::Approx(6.0));
    std::set<std::tuple<double, double, double>> seen;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3& p = g.points[i];
      const Vec3& nrm = g.normals[i];
      CHECK(p.cwiseAbs().maxCoeff() == 0.5);
      CHECK(nrm.norm() == 1.0);
      CHECK(p.dot(nrm) == 0.5);  // outward
      seen.emplace(p[0], p[1], p[2]);
    }
    CHECK(seen.size() == g.size());
  }
  CHECK_THROWS_AS(surface_grid(0), InvalidInput);
}

TEST_CASE("surface grid face order") {
  const SurfaceGrid g = surface_grid(2);
  const Vec3 expected[6] = {-Vec3::UnitX(), Vec3::UnitX(), -Vec3::UnitY(),
                            Vec3::UnitY(),  -Vec3::UnitZ(), Vec3::UnitZ()};
  for (int f = 0; f < 6; ++f) CHECK(g.normals[4 * f] == expected[f]);
}

namespace {
int v2(int x) {
  int v = 0;
  while (x % 2 == 0) {
    x /= 2;
    ++v;
  }
  return v;
}
}  // namespace

TEST_CASE("grid avoids lattice planes exactly when v2(n) <= v2(k)") {
  const SurfaceGrid g10 = surface_grid(10);
  CHECK(grid_avoids_lattice(g10, Lattice(2)));
  CHECK(grid_avoids_lattice(g10, Lattice(3)));
  CHECK_FALSE(grid_avoids_lattice(g10, Lattice(4)));  // (7.5)/10 - 1/2 = 1/4
  CHECK(grid_avoids_lattice(g10, Lattice(5)));
  for (int k = 1; k <= 12; ++k) {
    const SurfaceGrid g = surface_grid(k);
    for (int n = 1; n <= 12; ++n) CHECK(grid_avoids_lattice(g, Lattice(n)) == (v2(n) <= v2(k)));
  }
}

TEST_CASE("rigid motions") {
  const RigidMotion rot = RigidMotion::rotation(Vec3(1, 2, 3), 0.7);
  CHECK((rot.linear().transpose() * rot.linear()).isIdentity(1e-14));
  CHECK(rot.linear().determinant() == doctest::Approx(1.0));
  const RigidMotion m = RigidMotion(rot.linear(), Vec3(0.1, -0.2, 0.3));
  const Vec3 x(0.3, 0.4, -1.1);
  CHECK(m.inverse().apply(m.apply(x)).isApprox(x, 1e-14));
  CHECK(m.compose(m.inverse()).apply(x).isApprox(x, 1e-14));
  CHECK(apply_motion(m, x) == m.apply(x));
  CHECK(inverse_motion(m).apply(m.apply(x)).isApprox(x, 1e-14));
  CHECK(m.apply_vector(x) == rot.linear() * x);

  Mat3 shear = Mat3::Identity();
  shear(0, 1) = 0.1;
  CHECK_THROWS_AS(RigidMotion(shear, Vec3::Zero()), InvalidInput);
}

TEST_CASE("signed permutations are recognized exactly") {
  const auto p = RigidMotion::signed_permutation({1, 2, 0}, {1, -1, 1}, Vec3(0.5, 0, 0));
  CHECK(p.is_signed_permutation());
  CHECK(p.apply(Vec3(1, 2, 3)) == Vec3(2.5, -3, 1));
  CHECK(RigidMotion::translation(Vec3(1, 2, 3)).is_signed_permutation());
  CHECK(RigidMotion::identity().is_signed_permutation());
  CHECK_FALSE(RigidMotion::rotation(Vec3::UnitZ(), 0.3).is_signed_permutation());
  CHECK_THROWS_AS(RigidMotion::signed_permutation({0, 0, 1}, {1, 1, 1}), InvalidInput);
  CHECK_THROWS_AS(RigidMotion::signed_permutation({0, 1, 2}, {1, 2, 1}), InvalidInput);
}
