#pragma once

#include <optional>

#include <Eigen/Core>

#include "thinsheet/material.hpp"
#include "thinsheet/point_cloud.hpp"
#include "thinsheet/sphere_fit.hpp"

namespace thinsheet {

/// HIP (haptic interface point) and proxy, with the outward normal at the
/// proxy when the cloud defines one.
struct ContactState {
  Eigen::Vector3d hip = Eigen::Vector3d::Zero();
  Eigen::Vector3d proxy = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector3d> normal;
  bool in_contact = false;

  /// v_h, the vector from the proxy to the HIP.
  Eigen::Vector3d hip_vector() const { return hip - proxy; }

  static ContactState free_at(const Eigen::Vector3d& hip) { return {hip, hip, std::nullopt, false}; }
};

/// Height of the proxy center above the locally fitted surface.
inline double proxy_offset(const MaterialConfig& config) { return 0.5 * config.proxy_radius; }

/// Overshoot-weighted normal n = sum (R - r_k) (proxy - p_k) / r_k over the
/// points strictly inside the proxy ball, normalized. None when no point is
/// inside or the contributions cancel.
std::optional<Eigen::Vector3d> estimate_normal(const PointCloudModel& model, const Eigen::Vector3d& proxy,
                                               double proxy_radius);

/// (v_n . v_h) < 0, strict.
inline bool detect_collision(const Eigen::Vector3d& normal, const Eigen::Vector3d& hip_vector) {
  return normal.dot(hip_vector) < 0.0;
}

/// Requires a defined normal (ContractError otherwise).
bool detect_collision(const ContactState& state);

/// Sphere or plane fitted to the cloud around a contact, oriented so that
/// the signed distance grows outward.
struct LocalSurface {
  enum class Kind { sphere, plane };

  Kind kind = Kind::plane;
  AlgebraicSphere<double> sphere;          // Kind::sphere
  double orientation = 1.0;                // +1 when outward points away from the sphere center
  Eigen::Vector3d point = Eigen::Vector3d::Zero();   // Kind::plane
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // Kind::plane, outward

  double signed_distance(const Eigen::Vector3d& x) const;
  Eigen::Vector3d normal_at(const Eigen::Vector3d& x) const;
  /// The point at signed distance `offset` along the surface normal through x.
  Eigen::Vector3d project(const Eigen::Vector3d& x, double offset) const;
};

/// Fits the surface to the points within `radius` of `anchor`. Falls back to
/// a plane when the sphere fit degenerates or is nearly flat, and to the
/// plane through `anchor` with `outward` when there are too few points.
LocalSurface fit_local_surface(const PointCloudModel& model, const Eigen::Vector3d& anchor,
                               const Eigen::Vector3d& outward, double radius);

/// Advances the contact state to a new HIP. Free proxies follow the HIP until
/// the swept path meets the surface; in contact the proxy slides along the
/// surface toward the HIP at the fixed offset, and releases once the HIP is
/// back above that offset.
ContactState update_proxy(const PointCloudModel& model, const ContactState& state, const Eigen::Vector3d& new_hip,
                          const MaterialConfig& config);

}  // namespace thinsheet
