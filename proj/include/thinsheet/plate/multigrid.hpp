#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace thinsheet::plate {

/// Galerkin multigrid hierarchy over the square grid of plate unknowns, used
/// as a V-cycle preconditioner. Every level relaxes with the same damped
/// Jacobi update as the fine-grid iteration; the coarsest level is solved
/// densely.
template <typename Scalar>
class JacobiMultigrid {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  /// `side` is the number of unknowns per grid side of `fine`.
  JacobiMultigrid(const SparseMatrix& fine, Eigen::Index side, Scalar relaxation, int sweeps = 2)
      : relaxation_(relaxation), sweeps_(sweeps) {
    SparseMatrix a = fine;
    Eigen::Index m = side;
    for (;;) {
      Level level;
      level.a = a;
      level.inv_diag = a.diagonal().cwiseInverse();
      if (m <= kCoarsestSide) {
        levels_.push_back(std::move(level));
        break;
      }
      const Eigen::Index mc = m / 2;
      const SparseMatrix p1 = prolongation_1d(m, mc);
      level.p = kron(p1, p1);
      level.r = level.p.transpose();
      SparseMatrix ap = level.a * level.p;
      a = level.r * ap;
      a.prune(Scalar(0));
      levels_.push_back(std::move(level));
      m = mc;
    }
    coarse_.compute(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(levels_.back().a));
  }

  Scalar relaxation() const { return relaxation_; }
  void set_relaxation(Scalar omega) { relaxation_ = omega; }
  std::size_t levels() const { return levels_.size(); }

  /// Approximate A^{-1} b by one V-cycle from a zero initial guess.
  Vector apply(const Vector& b) const {
    Vector x = Vector::Zero(b.size());
    cycle(0, x, b);
    return x;
  }

 private:
  static constexpr Eigen::Index kCoarsestSide = 7;

  struct Level {
    SparseMatrix a, p, r;
    Vector inv_diag;
  };

  // Coarse node c sits at fine index 2c + 1; the clamped boundary acts as a
  // zero value at fine indices -1 and 2 mc + 1 and beyond.
  static SparseMatrix prolongation_1d(Eigen::Index m, Eigen::Index mc) {
    std::vector<Eigen::Triplet<Scalar>> t;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k % 2 == 1) {
        const Eigen::Index c = (k - 1) / 2;
        if (c < mc) t.emplace_back(k, c, Scalar(1));
      } else {
        const Eigen::Index left = (k - 2) / 2, right = k / 2;
        if (k >= 2 && left < mc) t.emplace_back(k, left, Scalar(0.5));
        if (right < mc) t.emplace_back(k, right, Scalar(0.5));
      }
    }
    SparseMatrix p(m, mc);
    p.setFromTriplets(t.begin(), t.end());
    return p;
  }

  // Unknown (i, j) has index i + j * m, so the 2D transfer is P_z (x) P_x.
  static SparseMatrix kron(const SparseMatrix& pz, const SparseMatrix& px) {
    std::vector<Eigen::Triplet<Scalar>> t;
    for (Eigen::Index a = 0; a < pz.outerSize(); ++a)
      for (typename SparseMatrix::InnerIterator ia(pz, a); ia; ++ia)
        for (Eigen::Index b = 0; b < px.outerSize(); ++b)
          for (typename SparseMatrix::InnerIterator ib(px, b); ib; ++ib)
            t.emplace_back(ia.row() * px.rows() + ib.row(), ia.col() * px.cols() + ib.col(), ia.value() * ib.value());
    SparseMatrix k(pz.rows() * px.rows(), pz.cols() * px.cols());
    k.setFromTriplets(t.begin(), t.end());
    return k;
  }

  void smooth(const Level& level, Vector& x, const Vector& b) const {
    for (int s = 0; s < sweeps_; ++s) x += relaxation_ * level.inv_diag.cwiseProduct(b - level.a * x);
  }

  void cycle(std::size_t l, Vector& x, const Vector& b) const {
    const Level& level = levels_[l];
    if (l + 1 == levels_.size()) {
      x = coarse_.solve(b);
      return;
    }
    smooth(level, x, b);
    const Vector coarse_residual = level.r * (b - level.a * x);
    Vector correction = Vector::Zero(coarse_residual.size());
    cycle(l + 1, correction, coarse_residual);
    x += level.p * correction;
    smooth(level, x, b);
  }

  Scalar relaxation_;
  int sweeps_;
  std::vector<Level> levels_;
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> coarse_;
};

}  // namespace thinsheet::plate
