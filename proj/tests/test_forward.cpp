#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "magpot/errors.hpp"
#include "magpot/fields.hpp"
#include "magpot/forward.hpp"
#include "oracles.hpp"

using namespace magpot;
namespace fs = std::filesystem;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

LatticeField random_lattice_field(const Lattice& l, std::mt19937_64& rng) {
  Eigen::VectorXd v(3 * static_cast<Eigen::Index>(l.cell_count()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(rng, -1, 1);
  return LatticeField(l, v);
}

BoxSimpleField sample_field() {
  BoxSimpleField f;
  f.add(Box(Vec3(-0.5, -0.5, -0.5), Vec3(0, 0, 0)), Vec3(1, 0, 0));
  f.add(Box(Vec3(-0.2, 0, 0.1), Vec3(0.5, 0.3, 0.5)), Vec3(0.2, -0.4, 0.7));
  f.add(Box(Vec3(0.1, -0.4, -0.3), Vec3(0.4, -0.1, 0.2)), Vec3(0, 0, -1));
  return f;
}

}  // namespace

TEST_CASE("empty field has zero potential") {
  CHECK(potential(BoxSimpleField(), Vec3(1, 2, 3)) == 0.0);
  CHECK(potential(LatticeField(Lattice(3)), Vec3(1, 2, 3)) == 0.0);
}

TEST_CASE("superposition") {
  const BoxSimpleField f = sample_field();
  BoxSimpleField g;
  g.add(Box(Vec3(0, 0, -0.5), Vec3(0.5, 0.5, 0)), Vec3(-0.3, 0.3, 0.1));
  for (const Vec3& x : {Vec3(0.7, 0.1, 0.2), Vec3(-1, 2, 0.3), Vec3(0.5, 0.5, 0.5)}) {
    const double sum = potential(f, x) + potential(g, x);
    CHECK(potential(f + g, x) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(potential(3.0 * f, x) == doctest::Approx(3.0 * potential(f, x)).epsilon(1e-13));
  }
}

TEST_CASE("overlapping and canonical representations have the same potential") {
  BoxSimpleField f = sample_field();
  f.add(Box(Vec3(-0.3, -0.3, -0.3), Vec3(0.3, 0.3, 0.3)), Vec3(0.5, 0.5, 0.5));
  const BoxSimpleField c = canonicalize(f);
  for (const Vec3& x : {Vec3(0.6, 0.1, 0.2), Vec3(-0.5, 0.7, -0.5)}) {
    CHECK(potential(c, x) == doctest::Approx(potential(f, x)).epsilon(1e-11));
  }
}

TEST_CASE("lattice and box-simple forms agree") {
  std::mt19937_64 rng(11);
  const Lattice l(3);
  const LatticeField f = random_lattice_field(l, rng);
  const BoxSimpleField b = f.to_box_simple();
  for (const Vec3& x : {Vec3(0.5, 0.1, 0.2), Vec3(2, -1, 0.3)}) {
    CHECK(potential(f, x) == doctest::Approx(potential(b, x)).epsilon(1e-13));
  }
}

TEST_CASE("box-simple potential against the graded oracle") {
  const BoxSimpleField f = sample_field();
  const Vec3 x(0.55, -0.6, 0.62);
  double ref = 0.0;
  for (const auto& p : f.parts()) ref += oracle::prism_potential(p.box.lo(), p.box.hi(), p.v, x);
  CHECK(potential(f, x) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("closed form agrees with library quadrature") {
  const Box b(Vec3(-0.1, 0.0, -0.2), Vec3(0.3, 0.25, 0.2));
  const Vec3 m(0.4, -0.1, 0.9);
  const SmoothField chart = uniform_box_field(b, m);
  for (const Vec3& x : {Vec3(0.5, 0.5, 0.5), Vec3(0.35, 0.1, 0.0), Vec3(-2, 3, 1)}) {
    QuadratureSpec spec;
    spec.rtol = 1e-12;
    CHECK(potential_quadrature(chart, x, spec).value ==
          doctest::Approx(prism_potential(b, m, x)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(potential_quadrature(chart, Vec3(0, 0.1, 0)), InvalidInput);
}

TEST_CASE("forward matrix columns and product") {
  const Lattice l(2);
  const SurfaceGrid g = surface_grid(4);
  const ForwardMatrix P = assemble(l, g);
  CHECK(P.rows() == 96);
  CHECK(P.cols() == 24);
  for (std::size_t c : {std::size_t{0}, std::size_t{5}}) {
    for (std::size_t j : {std::size_t{0}, std::size_t{17}, std::size_t{95}}) {
      const Vec3 basis = prism_potential_basis(l.cell(c), g.points[j]);
      for (int k = 0; k < 3; ++k) CHECK(P.entries(j, 3 * c + k) == basis[k]);
    }
  }
  std::mt19937_64 rng(5);
  const LatticeField f = random_lattice_field(l, rng);
  const Eigen::VectorXd s = apply(P, f);
  for (std::size_t j = 0; j < g.size(); j += 13) {
    CHECK(s(static_cast<Eigen::Index>(j)) == doctest::Approx(potential(f, g.points[j])).epsilon(1e-13));
  }
  CHECK_THROWS_AS(apply(P, LatticeField(Lattice(3))), DimensionMismatch);
}

TEST_CASE("assembly is bitwise reproducible and finite on lattice lines") {
  // n = 4, k = 10 puts grid points on lattice edge extensions
  const ForwardMatrix a = assemble(Lattice(4), surface_grid(10));
  const ForwardMatrix b = assemble(Lattice(4), surface_grid(10));
  CHECK(a.entries.allFinite());
  CHECK((a.entries.array() == b.entries.array()).all());
}

TEST_CASE("assembly size cap") {
  AssemblyLimits tiny;
  tiny.max_entries = 100;
  CHECK_THROWS_AS(assemble(Lattice(2), surface_grid(2), tiny), InvalidInput);
}

TEST_CASE("boundary L2 norm uses the quadrature weight") {
  const SurfaceGrid g = surface_grid(5);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.size()));
  CHECK(boundary_l2_norm(ones, g) == doctest::Approx(std::sqrt(6.0)));
  CHECK_THROWS_AS(boundary_l2_norm(Eigen::VectorXd::Ones(3), g), DimensionMismatch);
}

TEST_CASE("moved field: identity and translations") {
  const BoxSimpleField f = sample_field();
  const Vec3 x(0.9, -0.3, 0.4);
  CHECK(potential(transform_field(f, RigidMotion::identity()), x) == potential(f, x));
  const Vec3 t(0.25, -0.125, 0.5);
  const MovedField moved = transform_field(f, RigidMotion::translation(t));
  // f_U(x) = f(x + t): P(f)(x + t) = P(f_U)(x)
  CHECK(moved.value(Vec3(-0.3, -0.4, -0.6)) == f.value(Vec3(-0.3, -0.4, -0.6) + t));
  CHECK(std::abs(potential(f, x + t) - potential(moved, x)) < 1e-12 * std::abs(potential(f, x + t)));
}

TEST_CASE("moved field: axis permutation through the closed form") {
  const BoxSimpleField f = sample_field();
  const RigidMotion U = RigidMotion::signed_permutation({2, 0, 1}, {1, -1, 1}, Vec3(0.1, 0, 0));
  const MovedField moved = transform_field(f, U);
  REQUIRE(moved.as_box_simple().has_value());
  for (const Vec3& x : {Vec3(0.9, -0.3, 0.4), Vec3(-1, 1, 1)}) {
    CHECK(potential(moved, x) == doctest::Approx(potential(f, U.apply(x))).epsilon(1e-12));
  }
}

TEST_CASE("moved field: generic rotation through quadrature") {
  BoxSimpleField f;
  f.add(Box(Vec3(-0.25, -0.25, -0.25), Vec3(0.25, 0.25, 0.25)), Vec3(0.3, 0.1, 1.0));
  const RigidMotion U = RigidMotion::rotation(Vec3(1, 1, 0.5), 0.9);
  const MovedField moved = transform_field(f, U);
  CHECK_FALSE(moved.as_box_simple().has_value());
  QuadratureSpec spec;
  spec.rtol = 1e-12;
  for (const Vec3& x : {Vec3(0.9, -0.3, 0.4), Vec3(0.1, 0.8, -0.6)}) {
    CHECK(potential(moved, x, spec) == doctest::Approx(potential(f, U.apply(x))).epsilon(1e-9));
  }
}

TEST_CASE("matrix export round trip") {
  const ForwardMatrix P = assemble(Lattice(2), surface_grid(3));
  const fs::path dir = fs::temp_directory_path() / "magpot_forward_test";
  fs::create_directories(dir);
  const fs::path bin = dir / "P.bin";
  write_matrix_binary(P, bin);
  CHECK(fs::file_size(bin) == sizeof(double) * 54 * 24);
  std::ifstream side(dir / "P.bin.json");
  const auto meta = nlohmann::json::parse(side);
  CHECK(meta["rows"] == 54);
  CHECK(meta["cols"] == 24);
  CHECK(meta["order"] == "column-major");
  CHECK(meta["dtype"] == "float64");
  CHECK(meta["k"] == 3);
  CHECK(meta["delta"] == 0.5);
  CHECK(meta["convention"] == kConventionTag);
  const ForwardMatrix Q = read_matrix_binary(bin);
  CHECK((Q.entries.array() == P.entries.array()).all());

  write_matrix_csv(P, dir / "P.csv");
  std::ifstream csv(dir / "P.csv");
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 54);
  CHECK_THROWS_AS(read_matrix_binary(dir / "missing.bin"), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("a discretized invisible field is visible but faint") {
  const Lattice l(4);
  const ForwardMatrix P = assemble(l, surface_grid(10));
  const LatticeField f = discretize(bump_gradient(0.5), l);
  const Eigen::VectorXd s = apply(P, f);
  CHECK(s.norm() > 0.0);
  CHECK(s.norm() < 1e-2 * P.entries.norm() * f.coeffs().norm());
}
