#include <algorithm>
#include <cmath>
#include <limits>

#include "magpot/dense.hpp"

namespace magpot::dense {

namespace {

template <class T>
double machine_epsilon();
template <>
double machine_epsilon<double>() {
  return std::numeric_limits<double>::epsilon();
}
template <>
double machine_epsilon<DoubleDouble>() {
  return DoubleDouble::epsilon().hi();
}

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  T s(0.0);
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <class T>
double to_double(const T& x) {
  return static_cast<double>(x);
}

}  // namespace

template <class T>
Matrix<T> householder_r(Matrix<T> a) {
  using std::abs;
  using std::sqrt;
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> v(m);
  for (std::size_t k = 0; k < n && k < m; ++k) {
    T* col = a.column(k);
    T norm2(0.0);
    for (std::size_t i = k; i < m; ++i) norm2 += col[i] * col[i];
    const T norm = sqrt(norm2);
    if (norm == T(0.0)) continue;
    const T alpha = col[k] < T(0.0) ? norm : -norm;
    // v = x - alpha e_1, H = I - 2 v v^T / (v^T v)
    for (std::size_t i = k; i < m; ++i) v[i] = col[i];
    v[k] -= alpha;
    T vnorm2(0.0);
    for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == T(0.0)) continue;
    for (std::size_t j = k; j < n; ++j) {
      T* cj = a.column(j);
      T s(0.0);
      for (std::size_t i = k; i < m; ++i) s += v[i] * cj[i];
      const T f = T(2.0) * s / vnorm2;
      for (std::size_t i = k; i < m; ++i) cj[i] -= f * v[i];
    }
  }
  Matrix<T> r(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= j && i < m; ++i) r(i, j) = a(i, j);
  }
  return r;
}

template <class T>
std::vector<T> jacobi_singular_values(Matrix<T> a, int* sweeps) {
  using std::abs;
  using std::sqrt;
  const std::size_t m = a.rows(), n = a.cols();
  const T tol(static_cast<double>(std::max<std::size_t>(n, 1)) * machine_epsilon<T>());
  int sweep = 0;
  constexpr int kMaxSweeps = 60;
  for (; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        T* ap = a.column(p);
        T* aq = a.column(q);
        const T alpha = dot(ap, ap, m);
        const T beta = dot(aq, aq, m);
        const T gamma = dot(ap, aq, m);
        if (gamma == T(0.0) || abs(gamma) <= tol * sqrt(alpha * beta)) continue;
        rotated = true;
        const T zeta = (beta - alpha) / (T(2.0) * gamma);
        const T t = (zeta < T(0.0) ? T(-1.0) : T(1.0)) / (abs(zeta) + sqrt(T(1.0) + zeta * zeta));
        const T c = T(1.0) / sqrt(T(1.0) + t * t);
        const T s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const T x = ap[i], y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }
  if (sweeps) *sweeps = sweep;
  std::vector<T> sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = sqrt(dot(a.column(j), a.column(j), m));
  std::sort(sv.begin(), sv.end(), [](const T& x, const T& y) { return y < x; });
  return sv;
}

template <class T>
std::vector<T> singular_values(const Matrix<T>& a) {
  return jacobi_singular_values(householder_r(a));
}

template <class T>
Matrix<T> gram(const Matrix<T>& a) {
  const std::size_t n = a.cols();
  Matrix<T> g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const T s = dot(a.column(i), a.column(j), a.rows());
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

template <class T>
bool cholesky(const Matrix<T>& g, Matrix<T>& lower) {
  using std::sqrt;
  const std::size_t n = g.rows();
  lower = Matrix<T>(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    T d = g(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > T(0.0))) return false;
    const T ljj = sqrt(d);
    lower(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      T s = g(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return true;
}

template <class T>
InverseIterationResult smallest_eigenvalue(const Matrix<T>& lower, double rtol, int max_iterations) {
  using std::sqrt;
  const std::size_t n = lower.rows();
  InverseIterationResult out;
  if (n == 0) return out;
  // Deterministic start with components in every direction.
  std::vector<T> x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = T(1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i)));
  T norm = sqrt(dot(x.data(), x.data(), n));
  for (auto& xi : x) xi /= norm;

  T mu_prev(0.0);
  for (int it = 1; it <= max_iterations; ++it) {
    // L y = x
    for (std::size_t i = 0; i < n; ++i) {
      T s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * y[k];
      y[i] = s / lower(i, i);
    }
    // L^T z = y
    for (std::size_t ii = n; ii-- > 0;) {
      T s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * z[k];
      z[ii] = s / lower(ii, ii);
    }
    // Rayleigh quotient of (L L^T)^{-1} at the unit vector x.
    const T mu = dot(x.data(), z.data(), n);
    norm = sqrt(dot(z.data(), z.data(), n));
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / norm;
    out.iterations = it;
    const double change = std::abs(to_double(mu - mu_prev));
    if (it > 1 && change <= rtol * std::abs(to_double(mu))) {
      out.converged = true;
      out.eigenvalue = 1.0 / to_double(mu);
      return out;
    }
    mu_prev = mu;
  }
  out.eigenvalue = 1.0 / to_double(mu_prev);
  return out;
}

#define MAGPOT_INSTANTIATE(T)                                                            \
  template Matrix<T> householder_r<T>(Matrix<T>);                                        \
  template std::vector<T> jacobi_singular_values<T>(Matrix<T>, int*);                    \
  template std::vector<T> singular_values<T>(const Matrix<T>&);                          \
  template Matrix<T> gram<T>(const Matrix<T>&);                                          \
  template bool cholesky<T>(const Matrix<T>&, Matrix<T>&);                               \
  template InverseIterationResult smallest_eigenvalue<T>(const Matrix<T>&, double, int);

MAGPOT_INSTANTIATE(double)
MAGPOT_INSTANTIATE(DoubleDouble)

#undef MAGPOT_INSTANTIATE

}  // namespace magpot::dense
