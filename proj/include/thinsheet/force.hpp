#pragma once

#include <chrono>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "thinsheet/material.hpp"
#include "thinsheet/point_cloud.hpp"
#include "thinsheet/proxy.hpp"

namespace thinsheet {

/// Reaction force: magnitude plus outward unit direction.
struct ForceSample {
  double magnitude = 0.0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
  std::chrono::steady_clock::time_point timestamp{};
};

/// (E A / h) |X_h - X_p| along the outward normal. Requires in_contact and E > 0.
ForceSample compute_force(const ContactState& state, double local_modulus, const MaterialConfig& config);

/// E of the nearest model point; ties go to the smallest id.
double lookup_local_modulus(const PointCloudModel& model, const Eigen::Vector3d& contact);

struct PatchPoint {
  PointId id;
  Eigen::Vector3d position;
};

/// P_i + w_i f, with f the unit direction of the applied force (into the
/// surface). Positive w moves a point inward.
std::vector<PatchPoint> back_project(std::span<const PatchPoint> patch, std::span<const double> w,
                                     const Eigen::Vector3d& force_direction);

}  // namespace thinsheet
