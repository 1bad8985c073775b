#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <thread>

#include "thinsheet/point_cloud.hpp"
#include "thinsheet/session.hpp"

namespace thinsheet {

/// Latest completed deformation, tagged with the request it answers.
struct DeformationSnapshot {
  std::uint64_t job = 0;
  DeformationResult result;
};

/// Runs plate solves on its own thread. A new request cancels the solve in
/// flight; readers pick up the most recent completed snapshot without waiting.
class DeformationWorker {
 public:
  DeformationWorker(const PointCloudModel& model, PipelineSettings settings);
  ~DeformationWorker();

  std::uint64_t submit(const DeformationRequest& request);
  std::shared_ptr<const DeformationSnapshot> latest() const;
  std::uint64_t last_submitted() const;

  /// Blocks until no request is pending or running.
  void wait_idle();
  std::size_t cancelled() const;

 private:
  void run(std::stop_token stop);

  DeformationEngine engine_;
  mutable std::mutex mutex_;
  std::condition_variable_any wake_;
  std::condition_variable idle_;
  std::optional<std::pair<std::uint64_t, DeformationRequest>> pending_;
  std::stop_source current_;
  bool busy_ = false;
  Eigen::Vector3d running_proxy_ = Eigen::Vector3d::Zero();
  double proxy_radius_;
  std::uint64_t next_job_ = 0;
  std::size_t cancelled_ = 0;
  std::shared_ptr<const DeformationSnapshot> snapshot_;
  std::jthread thread_;
};

/// One probe client: answers each message with a reply. Force replies never
/// wait for the plate solve.
class LiveSession {
 public:
  LiveSession(const PointCloudModel& model, PipelineSettings settings);

  std::string greeting() const;
  std::string handle(std::string_view message);
  DeformationWorker& worker() { return worker_; }

 private:
  const PointCloudModel* model_;
  ContactTracker tracker_;
  DeformationWorker worker_;
};

/// Serves probe clients over WebSocket on `port` until `stop` is requested.
/// `on_listening` receives the bound port (useful with port 0).
void serve(const PointCloudModel& model, const PipelineSettings& settings, unsigned short port,
           std::stop_token stop = {}, std::function<void(unsigned short)> on_listening = {});

}  // namespace thinsheet
