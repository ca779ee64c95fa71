#ifndef PEM_DOMAINS_HPP
#define PEM_DOMAINS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>

#include "pem/core_math.hpp"

namespace pem {

/// Source constraint sets.
///   Antisparse        ||s||_inf <= 1
///   NonnegAntisparse  [0,1]^n
///   Sparse            ||s||_1 <= 1
///   NonnegSparse      ||s||_1 <= 1, s >= 0
///   Simplex           s >= 0, sum s = 1
enum class SourceDomain { Antisparse, NonnegAntisparse, Sparse, NonnegSparse, Simplex };

/// True for the domains whose fast loop carries the shared inhibitory
/// threshold lambda_L.
constexpr bool requires_threshold_unit(SourceDomain d) noexcept {
  return d == SourceDomain::Sparse || d == SourceDomain::NonnegSparse || d == SourceDomain::Simplex;
}

constexpr bool is_nonnegative(SourceDomain d) noexcept {
  return d == SourceDomain::NonnegAntisparse || d == SourceDomain::NonnegSparse ||
         d == SourceDomain::Simplex;
}

constexpr bool is_box(SourceDomain d) noexcept {
  return d == SourceDomain::Antisparse || d == SourceDomain::NonnegAntisparse;
}

/// Lowercase names used in experiment files and CSV output.
std::string_view to_string(SourceDomain d) noexcept;
SourceDomain parse_domain(std::string_view name);

template <typename Scalar>
Scalar soft_threshold(Scalar u, Scalar lambda) {
  const Scalar mag = std::abs(u) - lambda;
  if (mag <= Scalar(0)) return Scalar(0);
  return u > Scalar(0) ? mag : -mag;
}

/// In-place output nonlinearity: clipping on boxes, soft-threshold on the
/// l1 ball, shifted ReLU on the nonnegative l1 ball and the simplex.
template <typename Derived>
void apply_nonlinearity_inplace(SourceDomain domain, Eigen::MatrixBase<Derived>& y,
                                typename Derived::Scalar lambda_L) {
  using Scalar = typename Derived::Scalar;
  switch (domain) {
    case SourceDomain::Antisparse:
      y = y.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
      break;
    case SourceDomain::NonnegAntisparse:
      y = y.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
      break;
    case SourceDomain::Sparse:
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = soft_threshold(y(i), lambda_L);
      break;
    case SourceDomain::NonnegSparse:
    case SourceDomain::Simplex:
      y = (y.array() - lambda_L).cwiseMax(Scalar(0)).matrix();
      break;
  }
}

template <typename Derived>
Vec<typename Derived::Scalar> apply_nonlinearity(SourceDomain domain,
                                                 const Eigen::MatrixBase<Derived>& y_pre,
                                                 typename Derived::Scalar lambda_L) {
  Vec<typename Derived::Scalar> y = y_pre;
  apply_nonlinearity_inplace(domain, y, lambda_L);
  return y;
}

/// One step of the shared inhibitory threshold. ReLU-rectified on the l1
/// balls, linear (sign-free) on the simplex.
template <typename Derived>
typename Derived::Scalar update_threshold(SourceDomain domain, typename Derived::Scalar lambda_L,
                                          const Eigen::MatrixBase<Derived>& y_new,
                                          typename Derived::Scalar eta_lambda) {
  using Scalar = typename Derived::Scalar;
  switch (domain) {
    case SourceDomain::Sparse:
      return std::max(Scalar(0), lambda_L + eta_lambda * (y_new.cwiseAbs().sum() - Scalar(1)));
    case SourceDomain::NonnegSparse:
      return std::max(Scalar(0), lambda_L + eta_lambda * (y_new.sum() - Scalar(1)));
    case SourceDomain::Simplex:
      return lambda_L + eta_lambda * (y_new.sum() - Scalar(1));
    default:
      throw DomainMismatch("update_threshold called on a box domain");
  }
}

/// Euclidean projection onto {p >= 0, sum p = radius} (sort-based).
template <typename Derived>
Vec<typename Derived::Scalar> project_simplex(const Eigen::MatrixBase<Derived>& v,
                                              typename Derived::Scalar radius = 1) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = v.size();
  Vec<Scalar> sorted = v;
  std::sort(sorted.data(), sorted.data() + n, std::greater<Scalar>());
  Scalar cumsum = 0;
  Scalar theta = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += sorted(k);
    const Scalar candidate = (cumsum - radius) / Scalar(k + 1);
    if (sorted(k) - candidate > Scalar(0)) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(Scalar(0)).matrix();
}

/// Exact Euclidean projection onto the domain.
///
/// The two l1 balls reduce to the simplex projection:
///   Sparse:       v if ||v||_1 <= 1, else sign(v) * P_simplex(|v|).
///   NonnegSparse: p = max(v, 0); p if sum p <= 1, else P_simplex(v).
/// The second rule follows from the KKT conditions of min ||x - v||^2 over
/// {x >= 0, 1'x <= 1}: x = max(v - theta, 0) with theta >= 0 and
/// theta * (1'x - 1) = 0, so theta = 0 when max(v,0) is feasible and
/// otherwise the constraint is active and x is the simplex projection.
template <typename Derived>
Vec<typename Derived::Scalar> euclidean_project(SourceDomain domain,
                                                const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  switch (domain) {
    case SourceDomain::Antisparse:
    case SourceDomain::NonnegAntisparse:
      return apply_nonlinearity(domain, v, Scalar(0));
    case SourceDomain::Simplex:
      return project_simplex(v);
    case SourceDomain::Sparse: {
      if (v.cwiseAbs().sum() <= Scalar(1)) return v;
      Vec<Scalar> mag = project_simplex(v.cwiseAbs());
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) < Scalar(0)) mag(i) = -mag(i);
      return mag;
    }
    case SourceDomain::NonnegSparse: {
      Vec<Scalar> p = v.cwiseMax(Scalar(0));
      if (p.sum() <= Scalar(1)) return p;
      return project_simplex(v);
    }
  }
  return v;
}

/// Membership with slack `tol` on every inequality and equality.
template <typename Derived>
bool contains(SourceDomain domain, const Eigen::MatrixBase<Derived>& s,
              typename Derived::Scalar tol = 1e-6) {
  using Scalar = typename Derived::Scalar;
  if (!s.allFinite()) return false;
  const bool nonneg_ok = !is_nonnegative(domain) || s.minCoeff() >= -tol;
  if (!nonneg_ok) return false;
  switch (domain) {
    case SourceDomain::Antisparse:
    case SourceDomain::NonnegAntisparse:
      return s.cwiseAbs().maxCoeff() <= Scalar(1) + tol;
    case SourceDomain::Sparse:
    case SourceDomain::NonnegSparse:
      return s.cwiseAbs().sum() <= Scalar(1) + tol;
    case SourceDomain::Simplex:
      return std::abs(s.sum() - Scalar(1)) <= tol;
  }
  return false;
}

}  // namespace pem

#endif  // PEM_DOMAINS_HPP
