#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "thinsheet/force.hpp"
#include "thinsheet/point_cloud.hpp"

// Text messages exchanged with probe clients. Each message travels as one
// WebSocket text frame, which carries its length.
//
//   client -> server   HIP t x y z
//   server -> client   MODEL n            followed by n lines `id x y z E`
//                      STATE t px py pz contact fmag fx fy fz stale
//                                         optionally followed by `PATCH k` and
//                                         k lines `id x y z`
//                      ERROR text
namespace thinsheet::protocol {

struct HipMessage {
  double t = 0.0;
  Eigen::Vector3d hip = Eigen::Vector3d::Zero();
};

struct StateMessage {
  double t = 0.0;
  Eigen::Vector3d proxy = Eigen::Vector3d::Zero();
  bool contact = false;
  double force_magnitude = 0.0;
  Eigen::Vector3d force_direction = Eigen::Vector3d::Zero();
  bool stale = false;
  std::optional<std::vector<PatchPoint>> patch;
};

struct ModelMessage {
  std::vector<PointId> ids;
  std::vector<MaterialPoint> points;
};

/// Throws ProtocolError on anything but a well-formed HIP line.
HipMessage parse_hip(std::string_view message);
std::string format_hip(const HipMessage& hip);

std::string format_state(const StateMessage& state);
StateMessage parse_state(std::string_view message);

std::string format_model(const PointCloudModel& model);
ModelMessage parse_model(std::string_view message);

std::string format_error(std::string_view text);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

}  // namespace thinsheet::protocol
