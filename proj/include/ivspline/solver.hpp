#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ivspline/datamodel.hpp"
#include "ivspline/kernel.hpp"
#include "ivspline/spline.hpp"

namespace ivspline {

/// Etilde = E + lambda Omega^-1 and the bordered system
/// [[Etilde, Z], [Z', 0]] (delta; a) = (Y; 0).
struct BlockSystem {
  Eigen::MatrixXd etilde;
  Eigen::MatrixXd kkt;
  Eigen::VectorXd rhs;
};

struct HatDiagnostics {
  double kkt_condition_estimate = 0.0;
  double block_inverse_check = 0.0;
  double jitter_applied = 0.0;
};

/// Everything that depends on (dataset, kernel) but not on lambda: the spline
/// design, Omega with its factorization, and Omega^-1.
class IvSplineProblem {
 public:
  IvSplineProblem(Dataset ds, const KernelSpec& spec);

  const Dataset& data() const { return data_; }
  const KernelSpec& kernel() const { return spec_; }
  const DesignMatrices& design() const { return design_; }
  const OmegaMatrix& omega() const { return omega_; }
  const Eigen::MatrixXd& omega_inverse() const { return omega_inv_; }
  Eigen::Index size() const { return data_.size(); }

  BlockSystem block_system(double lambda) const;

  SplineFit fit(double lambda) const { return fit(lambda, data_.y); }
  /// Block solve with an arbitrary outcome vector on the same design.
  SplineFit fit(double lambda, const Eigen::VectorXd& y) const;

  /// Closed form [P + E Etilde^-1 (I - P)] Y, P = Z (Z' Etilde^-1 Z)^-1 Z' Etilde^-1.
  Eigen::VectorXd fitted_values(double lambda) const;

  /// Checks the analytic block inverse against the bordered matrix.
  HatDiagnostics hat_diagnostics(double lambda) const;

  /// Analytic inverse of the bordered matrix assembled from Etilde^-1.
  Eigen::MatrixXd analytic_block_inverse(double lambda) const;

  /// The (n+2) x n operator mapping Y to (delta; a).
  Eigen::MatrixXd coefficient_operator(double lambda) const;

  /// Fills diagnostics of a fit computed against outcome y.
  void annotate(SplineFit& fit, const Eigen::VectorXd& y) const;

 private:
  Dataset data_;
  KernelSpec spec_;
  DesignMatrices design_;
  OmegaMatrix omega_;
  Eigen::MatrixXd omega_inv_;
};

/// Solves the same problem for many lambdas at O(n^2) each, by simultaneous
/// diagonalization of E and Omega^-1 on the null space of Z'. Used by
/// cross-validation; agrees with IvSplineProblem::fit.
class LambdaPath {
 public:
  explicit LambdaPath(const IvSplineProblem& problem);

  /// Coefficients only; diagnostics are left at zero.
  SplineFit fit(double lambda) const;

 private:
  const IvSplineProblem* problem_;
  Eigen::MatrixXd basis_;      // Q V: maps spectral coordinates to delta
  Eigen::VectorXd eigen_;      // generalized eigenvalues
  Eigen::VectorXd projected_;  // V' Q' Y
  Eigen::HouseholderQR<Eigen::MatrixXd> zqr_;
};

void check_lambda(double lambda);

SplineFit fit(const Dataset& ds, double lambda, const KernelSpec& spec);
Eigen::VectorXd fitted_values(const Dataset& ds, double lambda, const KernelSpec& spec);
HatDiagnostics hat_diagnostics(const Dataset& ds, double lambda, const KernelSpec& spec);

/// Penalized objective (Y - Za - E delta)' Omega (Y - Za - E delta) + lambda delta' E delta.
double penalized_objective(const IvSplineProblem& problem, const SplineFit& fit, const Eigen::VectorXd& y);

}  // namespace ivspline
