#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "magpot/dense.hpp"
#include "magpot/double_double.hpp"

using namespace magpot;
using DD = DoubleDouble;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) a(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  }
  return a;
}

template <class T>
dense::Matrix<T> hilbert(int n) {
  dense::Matrix<T> h(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) h(i, j) = T(1.0) / T(static_cast<double>(i + j + 1));
  }
  return h;
}

// smallest eigenvalues from 50-digit arithmetic
constexpr double kHilbert8Min = 1.1115389663724424e-10;
constexpr double kHilbert12Min = 1.0479463979622267e-16;

}  // namespace

TEST_CASE("double-double arithmetic carries about 106 bits") {
  const DD third = DD(1.0) / DD(3.0);
  const DD back = third * DD(3.0);
  CHECK(std::abs(back.hi() - 1.0) + std::abs(back.lo()) < 1e-31);
  // 1 + 2^-80 is not representable in double but survives here
  const DD tiny(0x1.0p-80);
  const DD sum = DD(1.0) + tiny;
  CHECK(sum.hi() == 1.0);
  CHECK(sum.lo() == 0x1.0p-80);
  CHECK((sum - DD(1.0)).hi() == 0x1.0p-80);
  const DD r = sqrt(DD(2.0));
  const DD sq = r * r - DD(2.0);
  CHECK(std::abs(sq.hi()) < 1e-30);
  CHECK(sqrt(DD(0.0)) == DD(0.0));
  CHECK(abs(DD(-3.0)) == DD(3.0));
  CHECK(DD(1.0) < sum);
  CHECK(isfinite(sum));
}

TEST_CASE("singular values agree with Eigen's Jacobi SVD") {
  const Eigen::MatrixXd a = random_matrix(20, 8, 3);
  const Eigen::VectorXd ref = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  const auto sd = dense::singular_values(dense::from_eigen<double>(a));
  const auto sx = dense::singular_values(dense::from_eigen<DD>(a));
  REQUIRE(sd.size() == 8);
  REQUIRE(sx.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(sd[i] == doctest::Approx(ref(i)).epsilon(1e-13));
    CHECK(static_cast<double>(sx[i]) == doctest::Approx(ref(i)).epsilon(1e-13));
    if (i > 0) CHECK(sd[i] <= sd[i - 1]);
  }
}

TEST_CASE("Householder R reproduces the Gram matrix") {
  const Eigen::MatrixXd a = random_matrix(12, 5, 9);
  const auto r = dense::householder_r(dense::from_eigen<double>(a));
  REQUIRE(r.rows() == 5);
  Eigen::MatrixXd R(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) R(i, j) = r(i, j);
  }
  CHECK(R.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() == 0.0);
  CHECK((R.transpose() * R).isApprox(a.transpose() * a, 1e-13));
}

TEST_CASE("Cholesky and inverse iteration on Hilbert matrices") {
  dense::Matrix<double> l8;
  REQUIRE(dense::cholesky(hilbert<double>(8), l8));
  const auto e8 = dense::smallest_eigenvalue(l8, 1e-14, 200);
  CHECK(e8.converged);
  CHECK(e8.eigenvalue == doctest::Approx(kHilbert8Min).epsilon(1e-4));

  dense::Matrix<DD> x8;
  REQUIRE(dense::cholesky(hilbert<DD>(8), x8));
  CHECK(dense::smallest_eigenvalue(x8, 1e-14, 200).eigenvalue ==
        doctest::Approx(kHilbert8Min).epsilon(1e-12));

  // kappa ~ 1.7e16: beyond double, well inside double-double
  dense::Matrix<DD> x12;
  REQUIRE(dense::cholesky(hilbert<DD>(12), x12));
  CHECK(dense::smallest_eigenvalue(x12, 1e-14, 500).eigenvalue ==
        doctest::Approx(kHilbert12Min).epsilon(1e-8));
}

TEST_CASE("Cholesky rejects indefinite input") {
  dense::Matrix<double> g(2, 2), l;
  g(0, 0) = 1;
  g(0, 1) = g(1, 0) = 2;
  g(1, 1) = 1;
  CHECK_FALSE(dense::cholesky(g, l));
  dense::Matrix<DD> gx(2, 2), lx;
  gx(0, 0) = DD(1.0);
  CHECK_FALSE(dense::cholesky(gx, lx));  // singular
}

TEST_CASE("Gram matrix") {
  const Eigen::MatrixXd a = random_matrix(7, 4, 1);
  const auto g = dense::gram(dense::from_eigen<double>(a));
  const Eigen::MatrixXd ref = a.transpose() * a;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(g(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-14));
  }
}

TEST_CASE("Jacobi on a diagonal matrix needs no rotation") {
  dense::Matrix<double> d(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 3;
  d(2, 2) = 2;
  int sweeps = -1;
  const auto s = dense::jacobi_singular_values(d, &sweeps);
  CHECK(s == std::vector<double>{3, 2, 1});
  CHECK(sweeps <= 1);
}
