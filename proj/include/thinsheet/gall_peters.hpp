#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "thinsheet/errors.hpp"
#include "thinsheet/sphere_fit.hpp"

namespace thinsheet {

// Frame conventions: the polar axis is +y of the rotated frame, latitude is
// measured from the x-z equatorial plane, and the prime direction
// (latitude 0, longitude 0) is +z. Longitude grows toward +x.

/// Rotation that carries the proxy direction onto the prime direction.
template <typename Scalar>
struct PatchFrame {
  Eigen::Matrix<Scalar, 3, 3> rotation = Eigen::Matrix<Scalar, 3, 3>::Identity();
  AlgebraicSphere<Scalar> sphere;

  /// Unit direction of `point` from the center, expressed in the frame.
  Vector3<Scalar> local_direction(const Vector3<Scalar>& point) const {
    return (rotation * (point - sphere.center)).normalized();
  }
};

/// Equal-area image of a sphere point; `source_id` links back to the model.
template <typename Scalar>
struct PlanarPoint {
  Scalar x = Scalar(0);
  Scalar z = Scalar(0);
  std::size_t source_id = 0;
};

template <typename Scalar>
struct LatLon {
  Scalar latitude;
  Scalar longitude;
};

template <typename Scalar>
LatLon<Scalar> lat_lon_of(const Vector3<Scalar>& unit) {
  const Scalar sin_lat = std::clamp(unit.y(), Scalar(-1), Scalar(1));
  return {std::asin(sin_lat), std::atan2(unit.x(), unit.z())};
}

/// Minimal rotation taking (proxy - center) to +z. Antipodal proxies get a
/// half-turn about the first coordinate axis orthogonal to the direction.
template <typename Scalar>
PatchFrame<Scalar> build_frame(const AlgebraicSphere<Scalar>& sphere, const Vector3<Scalar>& proxy_on_sphere) {
  const Vector3<Scalar> offset = proxy_on_sphere - sphere.center;
  if (!(offset.norm() > Scalar(0))) throw DomainError("proxy coincides with the sphere center");
  const Vector3<Scalar> d = offset.normalized();
  const Vector3<Scalar> prime = Vector3<Scalar>::UnitZ();

  PatchFrame<Scalar> frame;
  frame.sphere = sphere;

  const Vector3<Scalar> axis = d.cross(prime);
  const Scalar sin_angle = axis.norm();
  const Scalar cos_angle = d.dot(prime);
  if (sin_angle <= Scalar(8) * std::numeric_limits<Scalar>::epsilon()) {
    if (cos_angle > Scalar(0)) return frame;
    // Half-turn about the lowest-index axis orthogonal to d (d is +-z here).
    for (int k = 0; k < 3; ++k) {
      if (std::abs(d(k)) < Scalar(0.5)) {
        Vector3<Scalar> e = Vector3<Scalar>::Unit(k);
        e = (e - e.dot(d) * d).normalized();
        frame.rotation = Scalar(2) * e * e.transpose() - Eigen::Matrix<Scalar, 3, 3>::Identity();
        return frame;
      }
    }
  }
  const Scalar angle = std::atan2(sin_angle, cos_angle);
  frame.rotation = Eigen::AngleAxis<Scalar>(angle, axis / sin_angle).toRotationMatrix();
  return frame;
}

/// x = r * longitude / sqrt(2), z = r * sqrt(2) * sin(latitude).
template <typename Scalar>
PlanarPoint<Scalar> to_plane(const Vector3<Scalar>& point_on_sphere, const PatchFrame<Scalar>& frame,
                             std::size_t source_id = 0) {
  const Scalar r = frame.sphere.radius;
  const Vector3<Scalar> v = frame.rotation * (point_on_sphere - frame.sphere.center);
  const Scalar len = v.norm();
  if (std::abs(len - r) > Scalar(1e-9) * std::max(Scalar(1), r))
    throw DomainError("point does not lie on the fitted sphere");
  const Vector3<Scalar> u = v / len;
  if (std::hypot(u.x(), u.z()) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon())
    throw DomainError("point at a pole of the patch frame; longitude undefined");
  const Scalar longitude = std::atan2(u.x(), u.z());
  const Scalar sqrt2 = std::numbers::sqrt2_v<Scalar>;
  return {r * longitude / sqrt2, r * sqrt2 * std::clamp(u.y(), Scalar(-1), Scalar(1)), source_id};
}

/// Exact inverse of to_plane on |x| <= r pi / sqrt(2), |z| <= r sqrt(2).
template <typename Scalar>
Vector3<Scalar> from_plane(const PlanarPoint<Scalar>& p, const PatchFrame<Scalar>& frame) {
  const Scalar r = frame.sphere.radius;
  const Scalar sqrt2 = std::numbers::sqrt2_v<Scalar>;
  const Scalar slack = Scalar(1) + Scalar(16) * std::numeric_limits<Scalar>::epsilon();
  if (std::abs(p.z) > r * sqrt2 * slack) throw DomainError("planar z beyond r*sqrt(2)");
  if (std::abs(p.x) > r * std::numbers::pi_v<Scalar> / sqrt2 * slack) throw DomainError("planar x beyond r*pi/sqrt(2)");

  const Scalar longitude = sqrt2 * p.x / r;
  const Scalar sin_lat = std::clamp(p.z / (r * sqrt2), Scalar(-1), Scalar(1));
  const Scalar cos_lat = std::sqrt((Scalar(1) - sin_lat) * (Scalar(1) + sin_lat));
  const Vector3<Scalar> local(cos_lat * std::sin(longitude), sin_lat, cos_lat * std::cos(longitude));
  return frame.sphere.center + r * (frame.rotation.transpose() * local);
}

}  // namespace thinsheet
