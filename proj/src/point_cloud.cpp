#include "thinsheet/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thinsheet/errors.hpp"

namespace thinsheet {

std::size_t PointCloudModel::VoxelHash::operator()(const VoxelKey& k) const noexcept {
  // Teschner et al. spatial hash primes.
  auto h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
  h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
  h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
  return static_cast<std::size_t>(h);
}

PointCloudModel::PointCloudModel(std::vector<MaterialPoint> points, double voxel_size)
    : points_(std::move(points)), voxel_size_(voxel_size) {
  if (points_.empty()) throw EmptyModelError();
  if (!(voxel_size_ > 0.0)) throw ValidationError("voxel size must be positive");

  bounds_.min = points_.front().position;
  bounds_.max = points_.front().position;
  for (PointId id = 0; id < points_.size(); ++id) {
    const auto& p = points_[id];
    if (!p.position.allFinite()) throw ValidationError("point " + std::to_string(id) + " has a non-finite position");
    if (!(p.elastic_modulus > 0.0) || !std::isfinite(p.elastic_modulus))
      throw ValidationError("point " + std::to_string(id) + " has a non-positive elastic modulus");
    bounds_.min = bounds_.min.cwiseMin(p.position);
    bounds_.max = bounds_.max.cwiseMax(p.position);
    cells_[key_of(p.position)].push_back(id);
  }
}

PointCloudModel::VoxelKey PointCloudModel::key_of(const Eigen::Vector3d& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size_)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size_)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size_))};
}

std::vector<PointId> PointCloudModel::query_ids(const Eigen::Vector3d& center, double radius) const {
  std::vector<PointId> ids;
  if (!(radius >= 0.0) || !center.allFinite()) return ids;

  const Eigen::Vector3d lo = center.array() - radius;
  const Eigen::Vector3d hi = center.array() + radius;
  if ((hi.array() < bounds_.min.array()).any() || (lo.array() > bounds_.max.array()).any()) return ids;

  const VoxelKey a = key_of(lo.cwiseMax(bounds_.min));
  const VoxelKey b = key_of(hi.cwiseMin(bounds_.max));
  const double cells = double(b.x - a.x + 1) * double(b.y - a.y + 1) * double(b.z - a.z + 1);
  const double r2 = radius * radius;

  if (cells > double(points_.size())) {
    for (PointId id = 0; id < points_.size(); ++id)
      if ((points_[id].position - center).squaredNorm() <= r2) ids.push_back(id);
    return ids;
  }

  for (auto x = a.x; x <= b.x; ++x)
    for (auto y = a.y; y <= b.y; ++y)
      for (auto z = a.z; z <= b.z; ++z) {
        const auto it = cells_.find({x, y, z});
        if (it == cells_.end()) continue;
        for (PointId id : it->second)
          if ((points_[id].position - center).squaredNorm() <= r2) ids.push_back(id);
      }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Neighbor> PointCloudModel::query_neighborhood(const Eigen::Vector3d& center, double radius) const {
  const auto ids = query_ids(center, radius);
  std::vector<Neighbor> out;
  out.reserve(ids.size());
  for (PointId id : ids) out.push_back({id, points_[id]});
  return out;
}

PointId PointCloudModel::nearest(const Eigen::Vector3d& target) const {
  const Eigen::Vector3d clamped = target.cwiseMax(bounds_.min).cwiseMin(bounds_.max);
  double radius = std::max(voxel_size_, (target - clamped).norm() * (1.0 + 1e-12) + voxel_size_);
  for (;;) {
    const auto ids = query_ids(target, radius);
    if (!ids.empty()) {
      PointId best = ids.front();
      double best_d2 = std::numeric_limits<double>::infinity();
      for (PointId id : ids) {
        const double d2 = (points_[id].position - target).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = id;
        }
      }
      return best;
    }
    radius *= 2.0;
  }
}

}  // namespace thinsheet
