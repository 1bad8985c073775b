#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "thinsheet/errors.hpp"
#include "thinsheet/gall_peters.hpp"

namespace thinsheet::plate {

template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Number of clamped node rings held at zero deflection on every edge.
inline constexpr Eigen::Index kClampedRings = 2;

/// Square uniform grid. Node (i, j) sits at origin + spacing * (i, j); the
/// first index runs along planar x, the second along planar z.
template <typename Scalar>
struct GridSpec {
  Eigen::Index n = 0;
  Scalar spacing = Scalar(0);
  Eigen::Matrix<Scalar, 2, 1> origin = Eigen::Matrix<Scalar, 2, 1>::Zero();

  void validate() const {
    if (n < 8) throw ContractError("grid needs at least 8 nodes per side");
    if (!(spacing > Scalar(0))) throw ContractError("grid spacing must be positive");
  }

  /// Continuous node coordinates of a planar location.
  Eigen::Matrix<Scalar, 2, 1> node_coordinates(Scalar x, Scalar z) const {
    return {(x - origin.x()) / spacing, (z - origin.y()) / spacing};
  }

  Eigen::Matrix<Scalar, 2, 1> node_position(Eigen::Index i, Eigen::Index j) const {
    return origin + spacing * Eigen::Matrix<Scalar, 2, 1>(Scalar(i), Scalar(j));
  }

  bool operator==(const GridSpec&) const = default;
};

/// Grid of n nodes covering the bounding box of `points` with the box mapped
/// onto nodes [2, n-3], i.e. two nodes of padding per side.
template <typename Scalar>
GridSpec<Scalar> fit_grid_to_patch(std::span<const PlanarPoint<Scalar>> points, Eigen::Index n) {
  if (points.empty()) throw ContractError("cannot size a grid for an empty patch");
  if (n < 8) throw ContractError("grid needs at least 8 nodes per side");
  Scalar min_x = points.front().x, max_x = min_x, min_z = points.front().z, max_z = min_z;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_z = std::min(min_z, p.z);
    max_z = std::max(max_z, p.z);
  }
  Scalar side = std::max(max_x - min_x, max_z - min_z);
  if (!(side > Scalar(0))) side = std::max({std::abs(min_x), std::abs(min_z), Scalar(1)}) * Scalar(1e-3);

  GridSpec<Scalar> spec;
  spec.n = n;
  spec.spacing = side / Scalar(n - 1 - 2 * kClampedRings);
  const Scalar half = spec.spacing * Scalar(n - 1) / Scalar(2);
  spec.origin << (min_x + max_x) / Scalar(2) - half, (min_z + max_z) / Scalar(2) - half;
  return spec;
}

/// Derivative of `f` along one axis: central differences inside, one-sided
/// differences on the first and last node.
template <typename Scalar>
Grid<Scalar> axis_derivative(const Grid<Scalar>& f, int axis, Scalar h) {
  const Eigen::Index n0 = f.rows(), n1 = f.cols();
  Grid<Scalar> d(n0, n1);
  const Eigen::Index len = axis == 0 ? n0 : n1;
  auto at = [&](Eigen::Index a, Eigen::Index b, Eigen::Index k) -> Scalar {
    return axis == 0 ? f(k, b) : f(a, k);
  };
  for (Eigen::Index a = 0; a < n0; ++a)
    for (Eigen::Index b = 0; b < n1; ++b) {
      const Eigen::Index k = axis == 0 ? a : b;
      Scalar v;
      if (k == 0) v = (at(a, b, 1) - at(a, b, 0)) / h;
      else if (k == len - 1) v = (at(a, b, len - 1) - at(a, b, len - 2)) / h;
      else v = (at(a, b, k + 1) - at(a, b, k - 1)) / (Scalar(2) * h);
      d(a, b) = v;
    }
  return d;
}

/// Second derivative along one axis: 3-point central stencil, evaluated at the
/// neighboring node on the first and last node.
template <typename Scalar>
Grid<Scalar> axis_second_derivative(const Grid<Scalar>& f, int axis, Scalar h) {
  const Eigen::Index n0 = f.rows(), n1 = f.cols();
  Grid<Scalar> d(n0, n1);
  const Eigen::Index len = axis == 0 ? n0 : n1;
  for (Eigen::Index a = 0; a < n0; ++a)
    for (Eigen::Index b = 0; b < n1; ++b) {
      const Eigen::Index k = std::clamp<Eigen::Index>(axis == 0 ? a : b, 1, len - 2);
      const Scalar lo = axis == 0 ? f(k - 1, b) : f(a, k - 1);
      const Scalar mid = axis == 0 ? f(k, b) : f(a, k);
      const Scalar hi = axis == 0 ? f(k + 1, b) : f(a, k + 1);
      d(a, b) = (lo - Scalar(2) * mid + hi) / (h * h);
    }
  return d;
}

/// Flexural rigidity on the grid with the derivative fields the variable-
/// rigidity plate operator needs.
template <typename Scalar>
struct RigidityGrid {
  GridSpec<Scalar> spec;
  Scalar poisson = Scalar(0.2);
  Grid<Scalar> D, Dx, Dz, Dxx, Dzz, Dxz, lapD;

  static RigidityGrid from_field(const GridSpec<Scalar>& spec, Grid<Scalar> rigidity, Scalar poisson) {
    spec.validate();
    if (rigidity.rows() != spec.n || rigidity.cols() != spec.n)
      throw ContractError("rigidity field does not match the grid size");
    if (!(rigidity > Scalar(0)).all()) throw ContractError("flexural rigidity must be positive at every node");
    if (!(poisson >= Scalar(0) && poisson < Scalar(0.5))) throw ContractError("poisson ratio out of range");

    RigidityGrid g;
    g.spec = spec;
    g.poisson = poisson;
    g.D = std::move(rigidity);
    const Scalar h = spec.spacing;
    g.Dx = axis_derivative<Scalar>(g.D, 0, h);
    g.Dz = axis_derivative<Scalar>(g.D, 1, h);
    g.Dxx = axis_second_derivative<Scalar>(g.D, 0, h);
    g.Dzz = axis_second_derivative<Scalar>(g.D, 1, h);
    g.Dxz = axis_derivative<Scalar>(g.Dx, 1, h);
    g.lapD = g.Dxx + g.Dzz;
    const Eigen::Index n = spec.n;
    // Five-point Laplacian where the full stencil fits.
    for (Eigen::Index i = 1; i + 1 < n; ++i)
      for (Eigen::Index j = 1; j + 1 < n; ++j)
        g.lapD(i, j) = (g.D(i + 1, j) + g.D(i - 1, j) + g.D(i, j + 1) + g.D(i, j - 1) - Scalar(4) * g.D(i, j)) / (h * h);
    return g;
  }
};

/// A planar sample carrying the rigidity of its source point.
template <typename Scalar>
struct RigiditySample {
  PlanarPoint<Scalar> point;
  Scalar rigidity;
};

/// Each node takes the rigidity of the nearest sample (ties: smallest
/// source id), then derivatives are formed by finite differences.
template <typename Scalar>
RigidityGrid<Scalar> rasterize_rigidity(std::span<const RigiditySample<Scalar>> samples, const GridSpec<Scalar>& spec,
                                        Scalar poisson = Scalar(0.2)) {
  spec.validate();
  if (samples.empty()) throw ContractError("rasterization needs at least one sample");
  for (const auto& s : samples)
    if (!(s.rigidity > Scalar(0))) throw ContractError("sample rigidity must be positive");

  // Bucket the samples on a coarse uniform 2D grid.
  Scalar min_x = samples.front().point.x, max_x = min_x, min_z = samples.front().point.z, max_z = min_z;
  for (const auto& s : samples) {
    min_x = std::min(min_x, s.point.x);
    max_x = std::max(max_x, s.point.x);
    min_z = std::min(min_z, s.point.z);
    max_z = std::max(max_z, s.point.z);
  }
  const Scalar extent = std::max({max_x - min_x, max_z - min_z, spec.spacing});
  const auto per_side = static_cast<Eigen::Index>(
      std::clamp<Scalar>(std::ceil(std::sqrt(Scalar(samples.size()) / Scalar(2))), Scalar(1), Scalar(1024)));
  const Scalar cell = extent / Scalar(per_side) * (Scalar(1) + Scalar(1e-9));
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(per_side * per_side));
  auto bucket_of = [&](Scalar x, Scalar z) {
    const auto bx = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((x - min_x) / cell)), 0, per_side - 1);
    const auto bz = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((z - min_z) / cell)), 0, per_side - 1);
    return std::pair{bx, bz};
  };
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto [bx, bz] = bucket_of(samples[k].point.x, samples[k].point.z);
    buckets[static_cast<std::size_t>(bx + bz * per_side)].push_back(k);
  }

  Grid<Scalar> field(spec.n, spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i)
    for (Eigen::Index j = 0; j < spec.n; ++j) {
      const auto node = spec.node_position(i, j);
      const auto [cx, cz] = bucket_of(node.x(), node.y());
      const Scalar gap_x = std::max({min_x - node.x(), node.x() - (min_x + cell * Scalar(per_side)), Scalar(0)});
      const Scalar gap_z = std::max({min_z - node.y(), node.y() - (min_z + cell * Scalar(per_side)), Scalar(0)});
      const Scalar outside = std::hypot(gap_x, gap_z);

      std::size_t best = 0;
      Scalar best_d2 = std::numeric_limits<Scalar>::infinity();
      std::size_t best_id = std::numeric_limits<std::size_t>::max();
      for (Eigen::Index ring = 0; ring < per_side; ++ring) {
        for (Eigen::Index bx = cx - ring; bx <= cx + ring; ++bx)
          for (Eigen::Index bz = cz - ring; bz <= cz + ring; ++bz) {
            if (std::max(std::abs(bx - cx), std::abs(bz - cz)) != ring) continue;
            if (bx < 0 || bz < 0 || bx >= per_side || bz >= per_side) continue;
            for (std::size_t k : buckets[static_cast<std::size_t>(bx + bz * per_side)]) {
              const Scalar dx = samples[k].point.x - node.x();
              const Scalar dz = samples[k].point.z - node.y();
              const Scalar d2 = dx * dx + dz * dz;
              const std::size_t id = samples[k].point.source_id;
              if (d2 < best_d2 || (d2 == best_d2 && id < best_id)) {
                best_d2 = d2;
                best_id = id;
                best = k;
              }
            }
          }
        // Unvisited buckets lie at least ring * cell from the node, and never
        // closer than the bucketed region itself.
        const Scalar reach = std::max(outside, Scalar(ring) * cell);
        if (best_d2 < reach * reach * (Scalar(1) - Scalar(1e-12))) break;
      }
      field(i, j) = samples[best].rigidity;
    }
  return RigidityGrid<Scalar>::from_field(spec, std::move(field), poisson);
}

/// Transverse load per unit area.
template <typename Scalar>
struct LoadField {
  GridSpec<Scalar> spec;
  Grid<Scalar> q;

  Scalar total_force() const { return q.sum() * spec.spacing * spec.spacing; }
};

/// Bilinear splat of a point force onto its four surrounding nodes, as
/// pressure weight * |F| / spacing^2.
template <typename Scalar>
LoadField<Scalar> assemble_load(Scalar force_magnitude, const PlanarPoint<Scalar>& contact, const GridSpec<Scalar>& spec) {
  spec.validate();
  if (!(force_magnitude >= Scalar(0))) throw ContractError("force magnitude must be non-negative");
  LoadField<Scalar> load{spec, Grid<Scalar>::Zero(spec.n, spec.n)};

  const auto g = spec.node_coordinates(contact.x, contact.z);
  if (!g.allFinite()) throw DomainError("contact location is not finite");
  const auto i0 = static_cast<Eigen::Index>(std::floor(g.x()));
  const auto j0 = static_cast<Eigen::Index>(std::floor(g.y()));
  const Scalar fx = g.x() - Scalar(i0);
  const Scalar fz = g.y() - Scalar(j0);
  const Scalar weights[2][2] = {{(1 - fx) * (1 - fz), (1 - fx) * fz}, {fx * (1 - fz), fx * fz}};

  const Eigen::Index lo = kClampedRings, hi = spec.n - 1 - kClampedRings;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (weights[a][b] == Scalar(0)) continue;
      const Eigen::Index i = i0 + a, j = j0 + b;
      if (i < lo || i > hi || j < lo || j > hi)
        throw DomainError("contact lies on or outside the clamped boundary of the plate grid");
    }
  if (force_magnitude == Scalar(0)) return load;
  const Scalar pressure = force_magnitude / (spec.spacing * spec.spacing);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (weights[a][b] != Scalar(0)) load.q(i0 + a, j0 + b) += weights[a][b] * pressure;
  return load;
}

/// Solved transverse deflection w (cm).
template <typename Scalar>
struct DeformationField {
  GridSpec<Scalar> spec;
  Grid<Scalar> w;
  long iterations = 0;
  Scalar residual = Scalar(0);
};

/// Bilinear interpolation of the deflection; exact at nodes.
template <typename Scalar>
Scalar sample_deformation(const DeformationField<Scalar>& field, const PlanarPoint<Scalar>& p) {
  const auto& spec = field.spec;
  const auto g = spec.node_coordinates(p.x, p.z);
  const Scalar last = Scalar(spec.n - 1);
  if (!(g.x() >= Scalar(0) && g.x() <= last && g.y() >= Scalar(0) && g.y() <= last))
    throw DomainError("sample point outside the plate grid");
  const auto i0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(g.x())), spec.n - 2);
  const auto j0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(g.y())), spec.n - 2);
  const Scalar fx = g.x() - Scalar(i0);
  const Scalar fz = g.y() - Scalar(j0);
  const auto& w = field.w;
  return (1 - fx) * (1 - fz) * w(i0, j0) + fx * (1 - fz) * w(i0 + 1, j0) + (1 - fx) * fz * w(i0, j0 + 1) +
         fx * fz * w(i0 + 1, j0 + 1);
}

}  // namespace thinsheet::plate
