#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace thinsheet {

using PointId = std::size_t;

/// One surface sample: position (cm) and local elastic modulus E > 0.
struct MaterialPoint {
  Eigen::Vector3d position;
  double elastic_modulus = 0.0;
};

struct Neighbor {
  PointId id;
  MaterialPoint point;
};

struct Bounds {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Eigen::Vector3d extent() const { return max - min; }
};

/// Immutable point cloud with a uniform voxel hash for ball queries.
class PointCloudModel {
 public:
  PointCloudModel(std::vector<MaterialPoint> points, double voxel_size);

  std::span<const MaterialPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const MaterialPoint& operator[](PointId id) const { return points_[id]; }
  const Bounds& bounds() const { return bounds_; }
  double voxel_size() const { return voxel_size_; }

  /// All points with |p - center| <= radius, in ascending id order.
  std::vector<Neighbor> query_neighborhood(const Eigen::Vector3d& center, double radius) const;

  /// Ids only; same selection and order as query_neighborhood.
  std::vector<PointId> query_ids(const Eigen::Vector3d& center, double radius) const;

  /// Nearest point to `target`; ties resolve to the smallest id.
  PointId nearest(const Eigen::Vector3d& target) const;

 private:
  struct VoxelKey {
    std::int64_t x, y, z;
    bool operator==(const VoxelKey&) const = default;
  };
  struct VoxelHash {
    std::size_t operator()(const VoxelKey& k) const noexcept;
  };

  VoxelKey key_of(const Eigen::Vector3d& p) const;

  std::vector<MaterialPoint> points_;
  Bounds bounds_;
  double voxel_size_;
  std::unordered_map<VoxelKey, std::vector<PointId>, VoxelHash> cells_;
};

enum class ModelFormat { csv, ply };

/// Parses a model. Throws ParseError, ValidationError or EmptyModelError.
PointCloudModel load_model(std::istream& in, ModelFormat format, double voxel_size);

/// Format chosen from the extension (.ply, otherwise CSV).
PointCloudModel load_model_file(const std::filesystem::path& path, double voxel_size);

/// Writes `x,y,z,E` rows at 17 significant digits (bit-exact reload).
void save_model_csv(std::ostream& out, const PointCloudModel& model);

}  // namespace thinsheet
