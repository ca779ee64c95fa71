#ifndef PEM_CORE_MATH_HPP
#define PEM_CORE_MATH_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pem/errors.hpp"

namespace pem {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = Vec<double>;
using Matrix = Mat<double>;

/// Dense symmetric matrix. Every write goes to both triangles, so
/// (i, j) and (j, i) are always bitwise equal.
template <typename Scalar>
class SymmetricMatrix {
 public:
  using Dense = Mat<Scalar>;

  SymmetricMatrix() = default;

  explicit SymmetricMatrix(Eigen::Index n) : m_(Dense::Zero(check_dim(n), n)) {}

  static SymmetricMatrix identity(Eigen::Index n) {
    SymmetricMatrix s(n);
    s.m_.setIdentity();
    return s;
  }

  /// Builds from the lower triangle of `m`; the upper triangle is ignored.
  template <typename Derived>
  static SymmetricMatrix from_lower(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw InvalidInput("symmetric matrix must be square");
    SymmetricMatrix s(m.rows());
    s.m_ = m.template selfadjointView<Eigen::Lower>();
    return s;
  }

  /// Builds from a dense matrix that must already be exactly symmetric.
  template <typename Derived>
  static SymmetricMatrix from_dense(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw InvalidInput("symmetric matrix must be square");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = j + 1; i < m.rows(); ++i)
        if (m(i, j) != m(j, i)) throw InvalidInput("matrix is not symmetric");
    SymmetricMatrix s(m.rows());
    s.m_ = m;
    return s;
  }

  template <typename Derived>
  static SymmetricMatrix diagonal(const Eigen::MatrixBase<Derived>& d) {
    SymmetricMatrix s(d.size());
    s.m_.diagonal() = d;
    return s;
  }

  Eigen::Index dim() const noexcept { return m_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  void set(Eigen::Index i, Eigen::Index j, Scalar v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  const Dense& dense() const noexcept { return m_; }
  Vec<Scalar> diag() const { return m_.diagonal(); }

  SymmetricMatrix operator+(const SymmetricMatrix& o) const {
    SymmetricMatrix s(dim());
    s.m_ = m_ + o.m_;
    return s;
  }

  SymmetricMatrix shifted(Scalar c) const {
    SymmetricMatrix s = *this;
    s.m_.diagonal().array() += c;
    return s;
  }

 private:
  static Eigen::Index check_dim(Eigen::Index n) {
    if (n < 1) throw InvalidInput("symmetric matrix dimension must be >= 1");
    return n;
  }

  Dense m_;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
}

}  // namespace detail

/// Eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations. Sweeps stop once the off-diagonal Frobenius norm drops below
/// 1e-12 * ||M||_F, or after 50 sweeps.
template <typename Scalar>
std::vector<Scalar> sym_eigvals(const SymmetricMatrix<Scalar>& M) {
  const Eigen::Index n = M.dim();
  if (n > 64) throw InvalidInput("sym_eigvals: dimension exceeds 64");
  detail::require_finite(M.dense(), "sym_eigvals");

  Mat<Scalar> a = M.dense();
  const Scalar total = a.norm();
  const Scalar tol = Scalar(1e-12) * total;

  auto off_norm = [&] {
    Scalar s = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 50 && off_norm() > tol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        // Rotation angle annihilating a(p,q); t is the smaller root of
        // t^2 + 2 theta t - 1 = 0.
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
      }
    }
  }

  std::vector<Scalar> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Lower Cholesky factor. A pivot (the value under the square root) at or
/// below `pivot_tol` raises NotPositiveDefinite.
template <typename Derived>
Mat<typename Derived::Scalar> cholesky_lower(const Eigen::MatrixBase<Derived>& M,
                                             typename Derived::Scalar pivot_tol = 1e-14) {
  using Scalar = typename Derived::Scalar;
  if (M.rows() != M.cols()) throw InvalidInput("cholesky: matrix must be square");
  detail::require_finite(M, "cholesky");
  const Eigen::Index n = M.rows();
  Mat<Scalar> L = Mat<Scalar>::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = M(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    if (!(pivot > pivot_tol)) throw NotPositiveDefinite("cholesky: non-positive pivot at column " + std::to_string(j));
    const Scalar ljj = std::sqrt(pivot);
    L(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Scalar s = M(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / ljj;
    }
  }
  return L;
}

/// log det(M) for symmetric positive definite M via Cholesky.
template <typename Scalar>
Scalar cholesky_logdet(const SymmetricMatrix<Scalar>& M) {
  const auto& a = M.dense();
  detail::require_finite(a, "cholesky_logdet");
  const Eigen::Index n = a.rows();
  Mat<Scalar> L = Mat<Scalar>::Zero(n, n);
  Scalar logdet = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    if (!(pivot > Scalar(1e-14)))
      throw NotPositiveDefinite("cholesky_logdet: non-positive pivot at column " + std::to_string(j));
    // log(pivot) == 2 log(L_jj)
    logdet += std::log(pivot);
    const Scalar ljj = std::sqrt(pivot);
    L(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Scalar s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / ljj;
    }
  }
  return logdet;
}

/// Regularized incomplete beta I_x(a, b) (continued fraction, Lentz).
double reg_incomplete_beta(double a, double b, double x);

/// CDF of Student's t with `nu` degrees of freedom. +/-inf map to 1/0.
double student_t_cdf(double x, double nu);

/// Inverse of student_t_cdf by bisection.
double student_t_quantile(double p, double nu);

}  // namespace pem

#endif  // PEM_CORE_MATH_HPP
