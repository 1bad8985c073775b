#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "thinsheet/plate/grid.hpp"

namespace thinsheet::plate {

/// The discretized variable-rigidity Kirchhoff operator
///
///   D lap^2 w + 2 Dx d/dx(lap w) + 2 Dz d/dz(lap w) + lap(D) lap w
///     - (1 - nu) (Dxx w_zz - 2 Dxz w_xz + Dzz w_xx)
///
/// expanded into one 13-point stencil per node. The unknowns are the nodes
/// [2, n-3] in both directions; the two outer rings are clamped at zero.
template <typename Scalar>
class PlateOperator {
 public:
  static constexpr int kStencilSize = 13;
  static constexpr std::array<std::array<int, 2>, kStencilSize> kOffsets = {{{0, 0},
                                                                             {1, 0},
                                                                             {-1, 0},
                                                                             {0, 1},
                                                                             {0, -1},
                                                                             {2, 0},
                                                                             {-2, 0},
                                                                             {0, 2},
                                                                             {0, -2},
                                                                             {1, 1},
                                                                             {1, -1},
                                                                             {-1, 1},
                                                                             {-1, -1}}};

  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  explicit PlateOperator(const RigidityGrid<Scalar>& rig) : n_(rig.spec.n), coeffs_(kStencilSize, rig.spec.n * rig.spec.n) {
    coeffs_.setZero();
    const Scalar h = rig.spec.spacing;
    const Scalar h2 = h * h, h3 = h2 * h, h4 = h2 * h2;
    const Scalar c = Scalar(1) - rig.poisson;
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i) {
        const Scalar D = rig.D(i, j), Dx = rig.Dx(i, j), Dz = rig.Dz(i, j);
        const Scalar Dxx = rig.Dxx(i, j), Dzz = rig.Dzz(i, j), Dxz = rig.Dxz(i, j), L = rig.lapD(i, j);
        auto col = coeffs_.col(i + j * n_);
        col(0) = Scalar(20) * D / h4 - Scalar(4) * L / h2 + Scalar(2) * c * (Dxx + Dzz) / h2;
        col(1) = Scalar(-8) * D / h4 - Scalar(4) * Dx / h3 + L / h2 - c * Dzz / h2;
        col(2) = Scalar(-8) * D / h4 + Scalar(4) * Dx / h3 + L / h2 - c * Dzz / h2;
        col(3) = Scalar(-8) * D / h4 - Scalar(4) * Dz / h3 + L / h2 - c * Dxx / h2;
        col(4) = Scalar(-8) * D / h4 + Scalar(4) * Dz / h3 + L / h2 - c * Dxx / h2;
        col(5) = D / h4 + Dx / h3;
        col(6) = D / h4 - Dx / h3;
        col(7) = D / h4 + Dz / h3;
        col(8) = D / h4 - Dz / h3;
        col(9) = Scalar(2) * D / h4 + Dx / h3 + Dz / h3 + c * Dxz / (Scalar(2) * h2);
        col(10) = Scalar(2) * D / h4 + Dx / h3 - Dz / h3 - c * Dxz / (Scalar(2) * h2);
        col(11) = Scalar(2) * D / h4 - Dx / h3 + Dz / h3 - c * Dxz / (Scalar(2) * h2);
        col(12) = Scalar(2) * D / h4 - Dx / h3 - Dz / h3 + c * Dxz / (Scalar(2) * h2);
      }
  }

  Eigen::Index n() const { return n_; }
  /// Unknowns per side.
  Eigen::Index interior() const { return n_ - 2 * kClampedRings; }
  Eigen::Index unknowns() const { return interior() * interior(); }

  /// Stencil coefficient `k` (see kOffsets) of the equation at node (i, j).
  Scalar coefficient(Eigen::Index i, Eigen::Index j, int k) const { return coeffs_(k, i + j * n_); }
  Scalar center(Eigen::Index i, Eigen::Index j) const { return coeffs_(0, i + j * n_); }

  static bool is_unknown(Eigen::Index i, Eigen::Index j, Eigen::Index n) {
    return i >= kClampedRings && j >= kClampedRings && i < n - kClampedRings && j < n - kClampedRings;
  }

  /// Smallest center coefficient over the unknowns.
  Scalar min_center() const {
    Scalar m = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i) m = std::min(m, center(i, j));
    return m;
  }

  /// Operator applied to `w`; zero on the clamped rings. Values of `w` on the
  /// rings are ignored (treated as zero).
  Grid<Scalar> apply(const Grid<Scalar>& w) const {
    Grid<Scalar> out = Grid<Scalar>::Zero(n_, n_);
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i) out(i, j) = row_dot(w, i, j, 0);
    return out;
  }

  /// q - A w on the unknowns, zero on the rings.
  Grid<Scalar> residual(const Grid<Scalar>& w, const Grid<Scalar>& q) const {
    Grid<Scalar> r = Grid<Scalar>::Zero(n_, n_);
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i) r(i, j) = q(i, j) - row_dot(w, i, j, 0);
    return r;
  }

  /// One damped Jacobi sweep:
  ///   w'(i,j) = (1 - omega) w(i,j) + omega (q(i,j) - sum_{k != 0} c_k w(nbr_k)) / c_0
  /// with every neighbor read from the previous iterate. Returns the norms of
  /// the residual of the *incoming* iterate, which the sweep gets for free.
  struct SweepResidual {
    Scalar max_norm;
    Scalar l2_norm;
  };

  SweepResidual jacobi_sweep(const Grid<Scalar>& w, const Grid<Scalar>& q, Scalar omega, Grid<Scalar>& out) const {
    out.setZero(n_, n_);
    Scalar residual = Scalar(0), squares = Scalar(0);
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i) {
        const Scalar off = row_dot(w, i, j, 1);
        const Scalar a = center(i, j);
        const Scalar r = q(i, j) - off - a * w(i, j);
        residual = std::max(residual, std::abs(r));
        squares += r * r;
        out(i, j) = (Scalar(1) - omega) * w(i, j) + omega * (q(i, j) - off) / a;
      }
    return {residual, std::sqrt(squares)};
  }

  /// Interior unknown (i, j) -> vector index.
  Eigen::Index index_of(Eigen::Index i, Eigen::Index j) const {
    return (i - kClampedRings) + (j - kClampedRings) * interior();
  }

  Vector pack(const Grid<Scalar>& g) const {
    Vector v(unknowns());
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i) v(index_of(i, j)) = g(i, j);
    return v;
  }

  Grid<Scalar> unpack(const Vector& v) const {
    Grid<Scalar> g = Grid<Scalar>::Zero(n_, n_);
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i) g(i, j) = v(index_of(i, j));
    return g;
  }

  /// Sparse matrix over the unknowns; couplings into the clamped rings drop out.
  SparseMatrix to_sparse() const {
    std::vector<Eigen::Triplet<Scalar>> triplets;
    triplets.reserve(static_cast<std::size_t>(unknowns() * kStencilSize));
    for (Eigen::Index j = kClampedRings; j < n_ - kClampedRings; ++j)
      for (Eigen::Index i = kClampedRings; i < n_ - kClampedRings; ++i)
        for (int k = 0; k < kStencilSize; ++k) {
          const Eigen::Index a = i + kOffsets[k][0], b = j + kOffsets[k][1];
          if (!is_unknown(a, b, n_)) continue;
          triplets.emplace_back(index_of(i, j), index_of(a, b), coefficient(i, j, k));
        }
    SparseMatrix m(unknowns(), unknowns());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
  }

 private:
  Scalar row_dot(const Grid<Scalar>& w, Eigen::Index i, Eigen::Index j, int first) const {
    const auto col = coeffs_.col(i + j * n_);
    Scalar s = Scalar(0);
    for (int k = first; k < kStencilSize; ++k) {
      const Eigen::Index a = i + kOffsets[k][0], b = j + kOffsets[k][1];
      if (is_unknown(a, b, n_)) s += col(k) * w(a, b);
    }
    return s;
  }

  Eigen::Index n_;
  Eigen::Matrix<Scalar, kStencilSize, Eigen::Dynamic> coeffs_;
};

}  // namespace thinsheet::plate
