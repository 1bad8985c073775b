#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "thinsheet/material.hpp"
#include "thinsheet/point_cloud.hpp"

namespace test_support {

inline std::filesystem::path data_dir() { return THINSHEET_DATA_DIR; }

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d v;
  do v = {g(rng), g(rng), g(rng)};
  while (v.norm() < 1e-6);
  return v.normalized();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = g(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(m);
  Eigen::Matrix3d q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1;
  return q;
}

/// Square grid of points in the plane z = height, spacing `step`, modulus E.
inline std::vector<thinsheet::MaterialPoint> flat_sheet(double half_width, double step, double modulus,
                                                        double height = 0.0) {
  std::vector<thinsheet::MaterialPoint> pts;
  const int k = static_cast<int>(std::round(half_width / step));
  for (int j = -k; j <= k; ++j)
    for (int i = -k; i <= k; ++i) pts.push_back({{i * step, j * step, height}, modulus});
  return pts;
}

/// Grid in x-y lifted onto the sphere of radius `radius` whose top is at z = 0.
inline std::vector<thinsheet::MaterialPoint> dome_sheet(double half_width, double step, double radius,
                                                        double modulus) {
  std::vector<thinsheet::MaterialPoint> pts;
  const int k = static_cast<int>(std::round(half_width / step));
  for (int j = -k; j <= k; ++j)
    for (int i = -k; i <= k; ++i) {
      const double x = i * step, y = j * step;
      pts.push_back({{x, y, std::sqrt(radius * radius - x * x - y * y) - radius}, modulus});
    }
  return pts;
}

/// Fibonacci-spiral samples of a full sphere.
inline std::vector<thinsheet::MaterialPoint> sphere_cloud(const Eigen::Vector3d& center, double radius, int count,
                                                          double modulus) {
  std::vector<thinsheet::MaterialPoint> pts;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double s = 1.0 - (2.0 * k + 1.0) / count;
    const double r = std::sqrt(1.0 - s * s);
    pts.push_back({center + radius * Eigen::Vector3d(r * std::cos(golden * k), r * std::sin(golden * k), s), modulus});
  }
  return pts;
}

}  // namespace test_support
