#pragma once

#include <limits>

#include <Eigen/Dense>

#include "thinsheet/errors.hpp"
#include "thinsheet/plate/grid.hpp"

namespace thinsheet::plate {

// Reference evaluation of the plate operator built term by term from
// difference operators, with no stencil expansion. Used to check the
// 13-point stencil and as the dense ground-truth solver.

namespace detail {

template <typename Scalar>
Grid<Scalar> clamp_rings(Grid<Scalar> w) {
  const Eigen::Index n = w.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i < kClampedRings || j < kClampedRings || i >= n - kClampedRings || j >= n - kClampedRings) w(i, j) = 0;
  return w;
}

// Five-point Laplacian on nodes [1, n-2]; zero elsewhere.
template <typename Scalar>
Grid<Scalar> laplacian5(const Grid<Scalar>& w, Scalar h) {
  const Eigen::Index n = w.rows();
  Grid<Scalar> l = Grid<Scalar>::Zero(n, n);
  for (Eigen::Index j = 1; j + 1 < n; ++j)
    for (Eigen::Index i = 1; i + 1 < n; ++i)
      l(i, j) = (w(i + 1, j) + w(i - 1, j) + w(i, j + 1) + w(i, j - 1) - 4 * w(i, j)) / (h * h);
  return l;
}

}  // namespace detail

/// Plate operator applied to `w` (ring values ignored); zero on the rings.
template <typename Scalar>
Grid<Scalar> reference_apply(const RigidityGrid<Scalar>& rig, const Grid<Scalar>& w_in) {
  const Eigen::Index n = rig.spec.n;
  const Scalar h = rig.spec.spacing;
  const Scalar c = Scalar(1) - rig.poisson;
  const Grid<Scalar> w = detail::clamp_rings(w_in);
  const Grid<Scalar> lap = detail::laplacian5(w, h);
  const Grid<Scalar> bilap = detail::laplacian5(lap, h);

  Grid<Scalar> out = Grid<Scalar>::Zero(n, n);
  for (Eigen::Index j = kClampedRings; j < n - kClampedRings; ++j)
    for (Eigen::Index i = kClampedRings; i < n - kClampedRings; ++i) {
      const Scalar lap_x = (lap(i + 1, j) - lap(i - 1, j)) / (2 * h);
      const Scalar lap_z = (lap(i, j + 1) - lap(i, j - 1)) / (2 * h);
      const Scalar w_xx = (w(i + 1, j) - 2 * w(i, j) + w(i - 1, j)) / (h * h);
      const Scalar w_zz = (w(i, j + 1) - 2 * w(i, j) + w(i, j - 1)) / (h * h);
      const Scalar w_xz = (w(i + 1, j + 1) - w(i + 1, j - 1) - w(i - 1, j + 1) + w(i - 1, j - 1)) / (4 * h * h);
      out(i, j) = rig.D(i, j) * bilap(i, j) + 2 * rig.Dx(i, j) * lap_x + 2 * rig.Dz(i, j) * lap_z +
                  rig.lapD(i, j) * lap(i, j) -
                  c * (rig.Dxx(i, j) * w_zz - 2 * rig.Dxz(i, j) * w_xz + rig.Dzz(i, j) * w_xx);
    }
  return out;
}

/// Dense direct solve of the discrete plate system over the interior nodes.
template <typename Scalar>
DeformationField<Scalar> oracle_direct_solve(const RigidityGrid<Scalar>& rig, const LoadField<Scalar>& load) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = rig.spec.n;
  if (n > 64) throw ContractError("dense oracle limited to n <= 64");
  if (!(load.spec == rig.spec)) throw ContractError("load and rigidity grids differ");

  const Eigen::Index m = n - 2 * kClampedRings;
  const Eigen::Index unknowns = m * m;
  auto index = [m](Eigen::Index i, Eigen::Index j) { return (i - kClampedRings) + (j - kClampedRings) * m; };

  Matrix a(unknowns, unknowns);
  Grid<Scalar> unit = Grid<Scalar>::Zero(n, n);
  for (Eigen::Index j = kClampedRings; j < n - kClampedRings; ++j)
    for (Eigen::Index i = kClampedRings; i < n - kClampedRings; ++i) {
      unit(i, j) = 1;
      const Grid<Scalar> column = reference_apply(rig, unit);
      unit(i, j) = 0;
      for (Eigen::Index jj = kClampedRings; jj < n - kClampedRings; ++jj)
        for (Eigen::Index ii = kClampedRings; ii < n - kClampedRings; ++ii) a(index(ii, jj), index(i, j)) = column(ii, jj);
    }

  Vector b(unknowns);
  for (Eigen::Index j = kClampedRings; j < n - kClampedRings; ++j)
    for (Eigen::Index i = kClampedRings; i < n - kClampedRings; ++i) b(index(i, j)) = load.q(i, j);

  const Eigen::PartialPivLU<Matrix> lu(a);
  const Scalar rcond = lu.rcond();
  if (!(rcond > Scalar(100) * std::numeric_limits<Scalar>::epsilon()))
    throw SingularOperatorError("plate operator is numerically singular");
  const Vector x = lu.solve(b);

  DeformationField<Scalar> field{rig.spec, Grid<Scalar>::Zero(n, n), 1, Scalar(0)};
  for (Eigen::Index j = kClampedRings; j < n - kClampedRings; ++j)
    for (Eigen::Index i = kClampedRings; i < n - kClampedRings; ++i) field.w(i, j) = x(index(i, j));
  field.residual = (b - a * x).cwiseAbs().maxCoeff();
  return field;
}

}  // namespace thinsheet::plate
