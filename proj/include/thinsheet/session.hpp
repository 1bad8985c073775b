#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "thinsheet/force.hpp"
#include "thinsheet/material.hpp"
#include "thinsheet/plate/solver.hpp"
#include "thinsheet/point_cloud.hpp"
#include "thinsheet/proxy.hpp"

namespace thinsheet {

struct TrajectoryStep {
  double t = 0.0;
  Eigen::Vector3d hip = Eigen::Vector3d::Zero();
};

/// `t,x,y,z` per line; blank lines and `#` comments skipped. Errors name the
/// step index and the line.
std::vector<TrajectoryStep> parse_script(std::istream& in);
std::vector<TrajectoryStep> load_script_file(const std::filesystem::path& path);

struct PipelineSettings {
  MaterialConfig material;
  plate::SolverSettings solver;
  Eigen::Index grid_n = 64;

  void validate() const;
};

struct SolverStats {
  long iterations = 0;
  double residual = 0.0;
  double wall_time_ms = 0.0;
};

struct StepRecord {
  double t = 0.0;
  Eigen::Vector3d hip = Eigen::Vector3d::Zero();
  Eigen::Vector3d proxy = Eigen::Vector3d::Zero();
  bool in_contact = false;
  std::optional<ForceSample> force;
  std::optional<SolverStats> solver;
  std::optional<std::vector<PatchPoint>> deformed_patch;
  std::optional<double> max_deflection;
  std::optional<std::string> diagnostic;
};

/// What the plate stage needs from one contact.
struct DeformationRequest {
  Eigen::Vector3d proxy = Eigen::Vector3d::Zero();
  Eigen::Vector3d surface_contact = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double force_magnitude = 0.0;
};

struct DeformationResult {
  std::vector<PatchPoint> deformed_patch;
  SolverStats solver;
  double max_deflection = 0.0;
};

/// Patch fit, equal-area flattening, rigidity grid and plate solve. The patch
/// (and the solver built on it) is reused until the proxy moves more than
/// half a proxy radius from where it was fitted.
class DeformationEngine {
 public:
  DeformationEngine(const PointCloudModel& model, PipelineSettings settings);
  ~DeformationEngine();
  DeformationEngine(DeformationEngine&&) noexcept;
  DeformationEngine& operator=(DeformationEngine&&) noexcept;

  DeformationResult deform(const DeformationRequest& request, std::stop_token stop = {});

  std::size_t patch_builds() const { return patch_builds_; }
  void invalidate();

 private:
  struct Patch;
  void rebuild(const DeformationRequest& request);

  const PointCloudModel* model_;
  PipelineSettings settings_;
  std::unique_ptr<Patch> patch_;
  std::size_t patch_builds_ = 0;
};

struct ContactUpdate {
  ContactState state;
  std::optional<ForceSample> force;
  std::optional<DeformationRequest> request;
};

/// Proxy and force for successive HIP samples. Cheap enough for the force loop.
class ContactTracker {
 public:
  ContactTracker(const PointCloudModel& model, MaterialConfig config);

  ContactUpdate update(const Eigen::Vector3d& hip);
  const ContactState& state() const { return state_; }
  void reset() { started_ = false; }

 private:
  const PointCloudModel* model_;
  MaterialConfig config_;
  ContactState state_;
  bool started_ = false;
};

/// Synchronous pipeline: every contact step solves the plate to completion.
class Pipeline {
 public:
  Pipeline(const PointCloudModel& model, PipelineSettings settings);

  StepRecord step(double t, const Eigen::Vector3d& hip);
  const ContactState& state() const { return tracker_.state(); }

 private:
  ContactTracker tracker_;
  DeformationEngine engine_;
};

std::vector<StepRecord> run_trajectory(const PointCloudModel& model, std::span<const TrajectoryStep> script,
                                       const PipelineSettings& settings);

/// One JSON object per line. With `omit_timing` the wall-clock field is null
/// so that output is reproducible byte for byte.
void write_record(std::ostream& out, const StepRecord& record, bool omit_timing = false);

}  // namespace thinsheet
