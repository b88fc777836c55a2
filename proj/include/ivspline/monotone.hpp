#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ivspline/datamodel.hpp"
#include "ivspline/kernel.hpp"
#include "ivspline/solver.hpp"
#include "ivspline/spline.hpp"

namespace ivspline {

enum class MonotoneDirection { increasing, decreasing };

inline double direction_sign(MonotoneDirection dir) { return dir == MonotoneDirection::increasing ? 1.0 : -1.0; }

/// Simplex weights p maximizing sum sqrt(n p_i) subject to sign-constrained
/// knot derivatives of the fit to p o Y.
struct TiltWeights {
  Eigen::VectorXd p;
  double objective = 0.0;  // n - sum sqrt(n p_i)
  double kkt_residual = 0.0;
  std::vector<Eigen::Index> active_constraints;
  bool phase_one_used = false;
  int newton_steps = 0;
};

struct TiltOptions {
  double barrier_start = 1.0;
  double barrier_shrink = 0.2;
  double barrier_stop = 1e-10;
  double decrement_stop = 1e-10;
  int max_outer = 200;
  int max_inner = 50;
  /// Strictly feasible starting weights; the uniform vector (or phase one) when empty.
  std::optional<Eigen::VectorXd> start;
};

/// L with L Y = (g'(Z_1), ..., g'(Z_n)) for the fit at this lambda.
Eigen::MatrixXd derivative_smoother_matrix(const IvSplineProblem& problem, double lambda);
Eigen::MatrixXd derivative_smoother_matrix(const Dataset& ds, double lambda, const KernelSpec& spec);

/// Solves max sum sqrt(n p_i) over {p >= 0, sum p = 1, G p >= 0}. Rows of G
/// that are identically zero are dropped. Throws InfeasibleError when no
/// strictly feasible p exists and SolverError(solver_stall) on iteration caps.
TiltWeights solve_tilt(const Eigen::MatrixXd& constraints, const TiltOptions& options = {});

TiltWeights tilt(const IvSplineProblem& problem, double lambda, MonotoneDirection dir, const TiltOptions& options = {});
TiltWeights tilt(const Dataset& ds, double lambda, const KernelSpec& spec, MonotoneDirection dir,
                 const TiltOptions& options = {});

/// Objective n - sum sqrt(n p_i).
double tilt_objective(const Eigen::VectorXd& p);

struct MonotoneFit {
  SplineFit fit;
  TiltWeights weights;
};

/// Refits on n * (p o Y), so uniform weights reproduce the unconstrained fit.
MonotoneFit fit_monotone(const IvSplineProblem& problem, double lambda, MonotoneDirection dir,
                         const TiltOptions& options = {});
SplineFit fit_monotone(const Dataset& ds, double lambda, const KernelSpec& spec, MonotoneDirection dir);

}  // namespace ivspline
