#include "ivspline/solver.hpp"

#include <cmath>
#include <sstream>

#include "ivspline/errors.hpp"

namespace ivspline {

namespace {

void check_design_rank(const Eigen::VectorXd& z) {
  const double lo = z.minCoeff();
  const double hi = z.maxCoeff();
  const double magnitude = std::max(std::abs(lo), std::abs(hi));
  if (!(hi - lo > 1e-12 * magnitude)) {
    throw SolverError(ErrorKind::collinearity, "regressor has fewer than two distinct values; [1, Z] is rank deficient");
  }
}

[[noreturn]] void throw_conditioning(double rcond) {
  std::ostringstream msg;
  msg << "block system solve produced non-finite values (condition estimate " << (rcond > 0.0 ? 1.0 / rcond : INFINITY)
      << ")";
  throw SolverError(ErrorKind::conditioning, msg.str());
}

}  // namespace

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InputError(ErrorKind::invalid_argument, "lambda must be positive and finite");
  }
}

IvSplineProblem::IvSplineProblem(Dataset ds, const KernelSpec& spec)
    : data_(std::move(ds)), spec_(spec), design_(build_design(data_.z)), omega_(build_omega(data_, spec)) {
  check_design_rank(data_.z);
  omega_inv_ = omega_.inverse();
  omega_inv_ = 0.5 * (omega_inv_ + omega_inv_.transpose()).eval();
}

BlockSystem IvSplineProblem::block_system(double lambda) const {
  check_lambda(lambda);
  const Eigen::Index n = size();
  BlockSystem sys;
  sys.etilde = design_.e + lambda * omega_inv_;
  sys.kkt = Eigen::MatrixXd::Zero(n + 2, n + 2);
  sys.kkt.topLeftCorner(n, n) = sys.etilde;
  sys.kkt.topRightCorner(n, 2) = design_.zdesign;
  sys.kkt.bottomLeftCorner(2, n) = design_.zdesign.transpose();
  sys.rhs = Eigen::VectorXd::Zero(n + 2);
  sys.rhs.head(n) = data_.y;
  return sys;
}

SplineFit IvSplineProblem::fit(double lambda, const Eigen::VectorXd& y) const {
  if (y.size() != size()) throw InputError(ErrorKind::dimension, "fit: outcome length mismatch");
  BlockSystem sys = block_system(lambda);
  sys.rhs.head(size()) = y;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.kkt);
  const double rcond = lu.rcond();
  const Eigen::VectorXd x = lu.solve(sys.rhs);
  if (!x.allFinite()) throw_conditioning(rcond);

  SplineFit out;
  out.delta = x.head(size());
  out.a = x.tail<2>();
  out.knots = data_.z;
  out.lambda = lambda;
  annotate(out, y);
  out.diagnostics.condition_estimate = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  return out;
}

void IvSplineProblem::annotate(SplineFit& fit, const Eigen::VectorXd& y) const {
  const Eigen::VectorXd residual = y - design_.zdesign * fit.a - design_.e * fit.delta;
  fit.diagnostics.mn_value = mn_criterion(residual, omega_);
  fit.diagnostics.roughness = roughness(fit.delta, design_.e);
  fit.diagnostics.constraint_residual = constraint_residual(fit.delta, fit.knots);
  fit.diagnostics.jitter_applied = omega_.jitter_applied;
}

Eigen::VectorXd IvSplineProblem::fitted_values(double lambda) const {
  check_lambda(lambda);
  const Eigen::MatrixXd etilde = design_.e + lambda * omega_inv_;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(etilde);
  const Eigen::VectorXd ey = lu.solve(data_.y);
  const Eigen::MatrixXd ez = lu.solve(design_.zdesign);
  const Eigen::Matrix2d gram = design_.zdesign.transpose() * ez;
  const Eigen::Vector2d a = gram.inverse() * (design_.zdesign.transpose() * ey);
  const Eigen::VectorXd projected = design_.zdesign * a;
  const Eigen::VectorXd out = projected + design_.e * lu.solve(data_.y - projected);
  if (!out.allFinite()) throw_conditioning(lu.rcond());
  return out;
}

Eigen::MatrixXd IvSplineProblem::analytic_block_inverse(double lambda) const {
  check_lambda(lambda);
  const Eigen::Index n = size();
  const Eigen::MatrixXd etilde = design_.e + lambda * omega_inv_;
  const Eigen::MatrixXd etilde_inv = Eigen::PartialPivLU<Eigen::MatrixXd>(etilde).inverse();
  const Eigen::MatrixXd& z = design_.zdesign;
  const Eigen::Matrix2d gram_inv = (z.transpose() * etilde_inv * z).inverse();
  const Eigen::MatrixXd projector = z * gram_inv * z.transpose() * etilde_inv;

  Eigen::MatrixXd inv(n + 2, n + 2);
  inv.topLeftCorner(n, n) = etilde_inv * (Eigen::MatrixXd::Identity(n, n) - projector);
  inv.topRightCorner(n, 2) = etilde_inv * z * gram_inv;
  inv.bottomLeftCorner(2, n) = gram_inv * z.transpose() * etilde_inv;
  inv.bottomRightCorner(2, 2) = -gram_inv;
  return inv;
}

HatDiagnostics IvSplineProblem::hat_diagnostics(double lambda) const {
  const BlockSystem sys = block_system(lambda);
  const Eigen::MatrixXd inv = analytic_block_inverse(lambda);
  const Eigen::Index m = sys.kkt.rows();
  HatDiagnostics out;
  out.block_inverse_check = (inv * sys.kkt - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  const double rcond = Eigen::PartialPivLU<Eigen::MatrixXd>(sys.kkt).rcond();
  out.kkt_condition_estimate = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  out.jitter_applied = omega_.jitter_applied;
  return out;
}

Eigen::MatrixXd IvSplineProblem::coefficient_operator(double lambda) const {
  const BlockSystem sys = block_system(lambda);
  const Eigen::Index n = size();
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.kkt);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 2, n);
  rhs.topRows(n).setIdentity();
  Eigen::MatrixXd out = lu.solve(rhs);
  if (!out.allFinite()) throw_conditioning(lu.rcond());
  return out;
}

LambdaPath::LambdaPath(const IvSplineProblem& problem) : problem_(&problem), zqr_(problem.design().zdesign) {
  const Eigen::Index n = problem.size();
  const Eigen::MatrixXd q_full = zqr_.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd null_basis = q_full.rightCols(n - 2);
  const Eigen::MatrixXd a = null_basis.transpose() * problem.design().e * null_basis;
  const Eigen::MatrixXd b = null_basis.transpose() * problem.omega_inverse() * null_basis;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (a + a.transpose()),
                                                                       0.5 * (b + b.transpose()));
  if (ges.info() != Eigen::Success) {
    throw SolverError(ErrorKind::conditioning, "simultaneous diagonalization failed");
  }
  eigen_ = ges.eigenvalues();
  basis_ = null_basis * ges.eigenvectors();
  projected_ = basis_.transpose() * problem.data().y;
}

SplineFit LambdaPath::fit(double lambda) const {
  check_lambda(lambda);
  const IvSplineProblem& p = *problem_;
  const Eigen::VectorXd coef = projected_.array() / (eigen_.array() + lambda);
  SplineFit out;
  out.delta = basis_ * coef;
  const Eigen::VectorXd rest = p.data().y - p.design().e * out.delta - lambda * (p.omega_inverse() * out.delta);
  out.a = zqr_.solve(rest);
  out.knots = p.data().z;
  out.lambda = lambda;
  if (!out.delta.allFinite() || !out.a.allFinite()) {
    throw SolverError(ErrorKind::conditioning, "spectral solve produced non-finite values");
  }
  return out;
}

SplineFit fit(const Dataset& ds, double lambda, const KernelSpec& spec) {
  check_lambda(lambda);
  return IvSplineProblem(ds, spec).fit(lambda);
}

Eigen::VectorXd fitted_values(const Dataset& ds, double lambda, const KernelSpec& spec) {
  check_lambda(lambda);
  return IvSplineProblem(ds, spec).fitted_values(lambda);
}

HatDiagnostics hat_diagnostics(const Dataset& ds, double lambda, const KernelSpec& spec) {
  check_lambda(lambda);
  return IvSplineProblem(ds, spec).hat_diagnostics(lambda);
}

double penalized_objective(const IvSplineProblem& problem, const SplineFit& fit, const Eigen::VectorXd& y) {
  const auto& dm = problem.design();
  const Eigen::VectorXd residual = y - dm.zdesign * fit.a - dm.e * fit.delta;
  return mn_criterion(residual, problem.omega()) + fit.lambda * roughness(fit.delta, dm.e);
}

}  // namespace ivspline
