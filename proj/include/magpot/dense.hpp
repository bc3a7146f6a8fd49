#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "magpot/double_double.hpp"

namespace magpot::dense {

/// Column-major dense matrix over an arbitrary real scalar.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0.0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  T* column(std::size_t j) { return data_.data() + j * rows_; }
  const T* column(std::size_t j) const { return data_.data() + j * rows_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Matrix<T> from_eigen(const Eigen::MatrixXd& a) {
  Matrix<T> out(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = T(a(i, j));
    }
  }
  return out;
}

/// Upper-triangular n x n factor R of a = QR (Householder), rows >= cols.
template <class T>
Matrix<T> householder_r(Matrix<T> a);

/// Singular values (descending) of a square matrix by one-sided Jacobi.
/// Returns the number of sweeps through `sweeps` when non-null.
template <class T>
std::vector<T> jacobi_singular_values(Matrix<T> a, int* sweeps = nullptr);

/// Singular values of a (rows >= cols): Householder QR followed by one-sided
/// Jacobi on R.
template <class T>
std::vector<T> singular_values(const Matrix<T>& a);

/// a^T a.
template <class T>
Matrix<T> gram(const Matrix<T>& a);

/// Lower Cholesky factor L with g = L L^T. Returns false when a pivot is not
/// positive.
template <class T>
bool cholesky(const Matrix<T>& g, Matrix<T>& lower);

struct InverseIterationResult {
  double eigenvalue = 0.0;  // smallest eigenvalue of L L^T
  int iterations = 0;
  bool converged = false;
};

/// Inverse power iteration with Rayleigh quotients for the smallest
/// eigenvalue of L L^T, given the lower-triangular factor L.
template <class T>
InverseIterationResult smallest_eigenvalue(const Matrix<T>& lower, double rtol, int max_iterations);

}  // namespace magpot::dense
