#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <stop_token>

#include "thinsheet/errors.hpp"
#include "thinsheet/plate/grid.hpp"
#include "thinsheet/plate/multigrid.hpp"
#include "thinsheet/plate/operator.hpp"

namespace thinsheet::plate {

enum class SolverMethod {
  /// Krylov (BiCGSTAB) iteration preconditioned by a damped-Jacobi multigrid
  /// V-cycle.
  multigrid,
  /// Plain damped Jacobi sweeps on the fine grid.
  jacobi,
};

struct SolverSettings {
  double tolerance = 1e-6;       // relative Frobenius change between iterates
  long max_iterations = 10000;
  double relaxation = 0.5;       // Jacobi damping omega in (0, 1]
  SolverMethod method = SolverMethod::multigrid;

  void validate() const {
    if (!(tolerance > 0.0)) throw ContractError("solver tolerance must be positive");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ContractError("relaxation must lie in (0, 1]");
    if (max_iterations < 1) throw ContractError("max_iterations must be at least 1");
  }
};

/// Consecutive residual increases that trigger the damping fallback.
inline constexpr int kDivergenceWindow = 25;

/// Plate solver bound to one rigidity grid. Construction validates the
/// operator and builds the multigrid hierarchy once, so repeated loads on the
/// same patch reuse it.
template <typename Scalar>
class PlateSolver {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  PlateSolver(const RigidityGrid<Scalar>& rig, SolverSettings settings)
      : spec_(rig.spec), settings_(settings), op_(rig) {
    settings_.validate();
    const Scalar min_center = op_.min_center();
    if (!(min_center > Scalar(0)) || !std::isfinite(min_center))
      throw IllConditionedRigidityError("plate operator has a non-positive center coefficient; rigidity varies too sharply");
    if (settings_.method == SolverMethod::multigrid) {
      matrix_ = op_.to_sparse();
      multigrid_ = std::make_unique<JacobiMultigrid<Scalar>>(matrix_, op_.interior(), Scalar(settings_.relaxation));
    }
  }

  const PlateOperator<Scalar>& plate_operator() const { return op_; }
  const GridSpec<Scalar>& spec() const { return spec_; }
  const SolverSettings& settings() const { return settings_; }

  /// Solves for w with w = 0 initially. Throws NonConvergenceError when the
  /// budget runs out and SolveCancelled when `stop` fires between iterations.
  DeformationField<Scalar> solve(const LoadField<Scalar>& load, std::stop_token stop = {}) const {
    if (!(load.spec == spec_)) throw ContractError("load and rigidity grids differ");
    DeformationField<Scalar> field{spec_, Grid<Scalar>::Zero(spec_.n, spec_.n), 0, Scalar(0)};
    const Scalar q_max = op_.pack(load.q).cwiseAbs().maxCoeff();
    if (q_max == Scalar(0)) {
      field.iterations = 1;
      return field;
    }
    if (settings_.method == SolverMethod::jacobi) return solve_jacobi(load, q_max, stop);
    return solve_multigrid(load, q_max, stop);
  }

 private:
  Scalar residual_bound(Scalar q_max) const { return Scalar(10) * Scalar(settings_.tolerance) * q_max; }

  static Scalar relative_change(Scalar diff_norm, Scalar previous_norm) {
    return diff_norm / std::max(previous_norm, Scalar(1e-30));
  }

  DeformationField<Scalar> solve_jacobi(const LoadField<Scalar>& load, Scalar q_max, std::stop_token stop) const {
    Grid<Scalar> w = Grid<Scalar>::Zero(spec_.n, spec_.n);
    Grid<Scalar> next(spec_.n, spec_.n);
    Grid<Scalar> best = w;
    Scalar omega = Scalar(settings_.relaxation);
    Scalar best_residual = std::numeric_limits<Scalar>::infinity();
    Scalar last_residual = best_residual;
    int increases = 0;
    bool halved = false;

    for (long it = 1; it <= settings_.max_iterations; ++it) {
      if (stop.stop_requested()) throw SolveCancelled();
      // Divergence is watched on the Euclidean norm: the max-norm can climb for
      // thousands of sweeps under a spread load while the iteration contracts.
      const auto [max_residual, residual] = op_.jacobi_sweep(w, load.q, omega, next);  // residual of w
      if (residual < best_residual) {
        best_residual = residual;
        best = w;
      }
      increases = residual > last_residual ? increases + 1 : 0;
      last_residual = residual;
      if (increases >= kDivergenceWindow) {
        if (halved) throw NonConvergenceError("damped Jacobi diverged after halving the relaxation", it, double(max_residual));
        halved = true;
        omega /= Scalar(2);
        increases = 0;
        w = best;
        last_residual = std::numeric_limits<Scalar>::infinity();
        continue;
      }
      const Scalar change = relative_change((next - w).matrix().norm(), w.matrix().norm());
      w.swap(next);
      if (change < Scalar(settings_.tolerance)) {
        const Scalar final_residual = op_.residual(w, load.q).abs().maxCoeff();
        if (final_residual <= residual_bound(q_max)) return {spec_, std::move(w), it, final_residual};
      }
    }
    throw NonConvergenceError("damped Jacobi reached max_iterations", settings_.max_iterations,
                              double(op_.residual(w, load.q).abs().maxCoeff()));
  }

  DeformationField<Scalar> solve_multigrid(const LoadField<Scalar>& load, Scalar q_max, std::stop_token stop) const {
    const Vector b = op_.pack(load.q);
    Vector x = Vector::Zero(b.size());
    Vector best = x;
    const auto& a = matrix_;
    auto& precond = *multigrid_;
    precond.set_relaxation(Scalar(settings_.relaxation));

    Scalar best_residual = std::numeric_limits<Scalar>::infinity();
    Scalar last_residual = best_residual;
    int increases = 0;
    bool halved = false;

    // BiCGSTAB state.
    Vector r = b - a * x, r_hat = r, p = Vector::Zero(b.size()), v = Vector::Zero(b.size());
    Scalar rho = 1, alpha = 1, omega_k = 1;
    auto restart = [&](const Vector& from) {
      x = from;
      r = b - a * x;
      r_hat = r;
      p.setZero();
      v.setZero();
      rho = alpha = omega_k = 1;
    };

    for (long it = 1; it <= settings_.max_iterations; ++it) {
      if (stop.stop_requested()) throw SolveCancelled();
      const Vector x_prev = x;

      const Scalar rho_next = r_hat.dot(r);
      if (rho_next == Scalar(0) || !std::isfinite(rho_next)) {
        restart(x);
        continue;
      }
      const Scalar beta = (rho_next / rho) * (alpha / omega_k);
      p = r + beta * (p - omega_k * v);
      const Vector y = precond.apply(p);
      v = a * y;
      const Scalar rv = r_hat.dot(v);
      if (rv == Scalar(0) || !std::isfinite(rv)) {
        restart(x);
        continue;
      }
      alpha = rho_next / rv;
      const Vector s = r - alpha * v;
      const Vector z = precond.apply(s);
      const Vector t = a * z;
      const Scalar tt = t.squaredNorm();
      omega_k = tt > Scalar(0) ? t.dot(s) / tt : Scalar(0);
      x += alpha * y + omega_k * z;
      r = s - omega_k * t;
      rho = rho_next;
      if (omega_k == Scalar(0)) restart(x);

      const Scalar residual = (b - a * x).cwiseAbs().maxCoeff();
      if (!std::isfinite(residual)) throw NonConvergenceError("plate solve produced a non-finite iterate", it, double(residual));
      if (residual < best_residual) {
        best_residual = residual;
        best = x;
      }
      increases = residual > last_residual ? increases + 1 : 0;
      last_residual = residual;
      if (increases >= kDivergenceWindow) {
        if (halved) throw NonConvergenceError("plate solve diverged after halving the relaxation", it, double(residual));
        halved = true;
        precond.set_relaxation(precond.relaxation() / Scalar(2));
        increases = 0;
        last_residual = std::numeric_limits<Scalar>::infinity();
        restart(best);
        continue;
      }
      const Scalar change = relative_change((x - x_prev).norm(), x_prev.norm());
      if (change < Scalar(settings_.tolerance) && residual <= residual_bound(q_max))
        return {spec_, op_.unpack(x), it, residual};
    }
    throw NonConvergenceError("plate solve reached max_iterations", settings_.max_iterations,
                              double((b - a * x).cwiseAbs().maxCoeff()));
  }

  GridSpec<Scalar> spec_;
  SolverSettings settings_;
  PlateOperator<Scalar> op_;
  typename PlateOperator<Scalar>::SparseMatrix matrix_;
  std::unique_ptr<JacobiMultigrid<Scalar>> multigrid_;
};

/// One-shot solve of the clamped variable-rigidity plate.
template <typename Scalar>
DeformationField<Scalar> solve_deformation(const RigidityGrid<Scalar>& rig, const LoadField<Scalar>& load,
                                           const SolverSettings& settings = {}, std::stop_token stop = {}) {
  return PlateSolver<Scalar>(rig, settings).solve(load, stop);
}

}  // namespace thinsheet::plate
