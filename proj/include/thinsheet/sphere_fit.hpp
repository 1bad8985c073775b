#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "thinsheet/errors.hpp"

namespace thinsheet {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Sphere in algebraic form u0|x|^2 + u1 x + u2 y + u3 z + u4 = 0 with the
/// Pratt normalization u1^2 + u2^2 + u3^2 - 4 u0 u4 = 1.
template <typename Scalar>
struct AlgebraicSphere {
  using Coefficients = Eigen::Matrix<Scalar, 5, 1>;

  Coefficients coefficients = Coefficients::Zero();
  Vector3<Scalar> center = Vector3<Scalar>::Zero();
  Scalar radius = Scalar(0);

  /// Center and radius from the coefficients: c = -[u1 u2 u3] / (2 u0),
  /// r = sqrt(|c|^2 - u4 / u0).
  static AlgebraicSphere from_coefficients(const Coefficients& u) {
    if (u(0) == Scalar(0)) throw DegenerateFitError("algebraic sphere with u0 = 0 is a plane");
    AlgebraicSphere s;
    s.coefficients = u;
    s.center = -u.template segment<3>(1) / (Scalar(2) * u(0));
    const Scalar r2 = s.center.squaredNorm() - u(4) / u(0);
    if (!(r2 > Scalar(0))) throw NumericalError("algebraic sphere has non-positive squared radius");
    s.radius = std::sqrt(r2);
    return s;
  }

  /// Canonical coefficients (u0 = 1/(2r) > 0) for a geometric sphere.
  static AlgebraicSphere from_center_radius(const Vector3<Scalar>& center, Scalar radius) {
    if (!(radius > Scalar(0))) throw ContractError("sphere radius must be positive");
    AlgebraicSphere s;
    const Scalar u0 = Scalar(1) / (Scalar(2) * radius);
    s.coefficients << u0, -center / radius, u0 * (center.squaredNorm() - radius * radius);
    s.center = center;
    s.radius = radius;
    return s;
  }

  /// Algebraic distance f(x).
  Scalar evaluate(const Vector3<Scalar>& x) const {
    const auto& u = coefficients;
    return u(0) * x.squaredNorm() + u.template segment<3>(1).dot(x) + u(4);
  }
};

/// The Pratt constraint matrix C (u^T C u = u1^2 + u2^2 + u3^2 - 4 u0 u4).
template <typename Scalar>
Eigen::Matrix<Scalar, 5, 5> pratt_constraint() {
  Eigen::Matrix<Scalar, 5, 5> c = Eigen::Matrix<Scalar, 5, 5>::Zero();
  c(0, 4) = c(4, 0) = Scalar(-2);
  c(1, 1) = c(2, 2) = c(3, 3) = Scalar(1);
  return c;
}

/// C^{-1}, closed form.
template <typename Scalar>
Eigen::Matrix<Scalar, 5, 5> pratt_constraint_inverse() {
  Eigen::Matrix<Scalar, 5, 5> c = Eigen::Matrix<Scalar, 5, 5>::Zero();
  c(0, 4) = c(4, 0) = Scalar(-0.5);
  c(1, 1) = c(2, 2) = c(3, 3) = Scalar(1);
  return c;
}

/// Scatter matrix D^T D of the rows [|p|^2, x, y, z, 1].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 5, 5> algebraic_scatter(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, 5, 5> m = Eigen::Matrix<Scalar, 5, 5>::Zero();
  Eigen::Matrix<Scalar, 5, 1> row;
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    const Vector3<Scalar> p = points.col(k);
    row << p.squaredNorm(), p, Scalar(1);
    m.template selfadjointView<Eigen::Lower>().rankUpdate(row);
  }
  return m.template selfadjointView<Eigen::Lower>();
}

/// Least-squares algebraic sphere through a 3xN point set under the Pratt
/// constraint. The generalized problem (D^T D) u = lambda C u is reduced with
/// the closed-form C^{-1}; the eigenvector with the smallest lambda among
/// u^T C u > 0 is kept. Data are centered and scaled before the solve (the
/// fit is similarity-equivariant) and the result mapped back.
template <typename Derived>
AlgebraicSphere<typename Derived::Scalar> fit_sphere(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  static_assert(Derived::RowsAtCompileTime == 3 || Derived::RowsAtCompileTime == Eigen::Dynamic,
                "fit_sphere expects a 3xN point matrix");
  if (points.rows() != 3) throw ContractError("fit_sphere expects a 3xN point matrix");
  if (points.cols() < 5) throw InsufficientDataError("sphere fit needs at least 5 points");

  const Vector3<Scalar> centroid = points.rowwise().mean();
  const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> shifted = points.colwise() - centroid;
  const Scalar scale = std::sqrt(shifted.colwise().squaredNorm().mean());
  if (!(scale > Scalar(0)) || !std::isfinite(scale)) throw DegenerateFitError("all points coincide");
  const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> normalized = shifted / scale;

  const Eigen::Matrix<Scalar, 5, 5> scatter = algebraic_scatter(normalized);
  const Eigen::Matrix<Scalar, 5, 5> constraint = pratt_constraint<Scalar>();
  const Eigen::Matrix<Scalar, 5, 5> reduced = pratt_constraint_inverse<Scalar>() * scatter;

  Eigen::EigenSolver<Eigen::Matrix<Scalar, 5, 5>> solver(reduced, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-solver failed on the Pratt system");

  using Coefficients = Eigen::Matrix<Scalar, 5, 1>;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar eig_scale = std::max(scatter.norm(), Scalar(1));
  bool found = false;
  Scalar best_lambda = Scalar(0);
  Scalar best_residual = Scalar(0);
  Coefficients best = Coefficients::Zero();
  for (int k = 0; k < 5; ++k) {
    if (std::abs(solver.eigenvalues()(k).imag()) > Scalar(1e3) * eps * eig_scale) continue;
    Coefficients v = solver.eigenvectors().col(k).real();
    const Scalar norm = v.norm();
    if (!(norm > Scalar(0))) continue;
    v /= norm;
    const Scalar c_norm = v.dot(constraint * v);
    if (!(c_norm > Scalar(0))) continue;
    v /= std::sqrt(c_norm);
    const Scalar lambda = solver.eigenvalues()(k).real();
    const Scalar residual = v.dot(scatter * v);
    const Scalar tie = Scalar(1e3) * eps * eig_scale;
    if (!found || lambda < best_lambda - tie ||
        (std::abs(lambda - best_lambda) <= tie && residual < best_residual)) {
      found = true;
      best_lambda = lambda;
      best_residual = residual;
      best = v;
    }
  }
  if (!found) throw NumericalError("no admissible Pratt eigenvector");
  if (std::abs(best(0)) < Scalar(1e-9) * best.norm())
    throw DegenerateFitError("points are coplanar (sphere fit reached its plane limit)");

  const auto local = AlgebraicSphere<Scalar>::from_coefficients(best);
  return AlgebraicSphere<Scalar>::from_center_radius(centroid + scale * local.center, scale * local.radius);
}

/// Radial projection onto the sphere: the nearer of the two intersections of
/// the center-to-point line.
template <typename Scalar>
Vector3<Scalar> project_to_sphere(const Vector3<Scalar>& point, const AlgebraicSphere<Scalar>& sphere) {
  const Vector3<Scalar> d = point - sphere.center;
  const Scalar n = d.norm();
  if (!(n > Scalar(0))) throw DomainError("point coincides with the sphere center; direction undefined");
  return sphere.center + (sphere.radius / n) * d;
}

/// Keeps points whose direction from the center makes a non-negative dot
/// product with the proxy direction (closed hemisphere facing the proxy).
template <typename Scalar, typename Id>
std::vector<std::pair<Id, Vector3<Scalar>>> cull_hemisphere(const std::vector<std::pair<Id, Vector3<Scalar>>>& projected,
                                                            const AlgebraicSphere<Scalar>& sphere,
                                                            const Vector3<Scalar>& proxy_on_sphere) {
  const Vector3<Scalar> axis = proxy_on_sphere - sphere.center;
  std::vector<std::pair<Id, Vector3<Scalar>>> kept;
  kept.reserve(projected.size());
  for (const auto& entry : projected)
    if ((entry.second - sphere.center).dot(axis) >= Scalar(0)) kept.push_back(entry);
  return kept;
}

}  // namespace thinsheet
