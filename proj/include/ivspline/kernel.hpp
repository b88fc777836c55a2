#pragma once

#include <Eigen/Dense>

#include "ivspline/datamodel.hpp"

namespace ivspline {

enum class KernelFamily { laplace };

/// Instrument weight function omega. Laplace uses scale b = sqrt(variance / 2)
/// per component and multiplies across components.
struct KernelSpec {
  KernelFamily family = KernelFamily::laplace;
  double variance = 1.0;
  bool standardize = true;

  void validate() const;
  double scale() const;
};

double omega_weight(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& d);

/// Omega[i][j] = n^-2 omega(W_i - W_j), kept together with the Cholesky
/// factor of (Omega + jitter * I).
struct OmegaMatrix {
  Eigen::MatrixXd values;
  double jitter_applied = 0.0;
  Eigen::LLT<Eigen::MatrixXd> cholesky;

  Eigen::Index size() const { return values.rows(); }
  Eigen::MatrixXd inverse() const;
};

// Jitter ladder used when Omega is numerically singular.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-6;

/// Cholesky with the jitter ladder; throws SolverError(singular_kernel) when
/// the ladder is exhausted.
OmegaMatrix factor_omega(Eigen::MatrixXd values);

/// Builds Omega from raw instruments, standardizing first if spec says so.
OmegaMatrix build_omega(const Eigen::MatrixXd& w, const KernelSpec& spec);
OmegaMatrix build_omega(const Dataset& ds, const KernelSpec& spec);

/// The V-statistic r' Omega r.
double mn_criterion(const Eigen::Ref<const Eigen::VectorXd>& residuals, const OmegaMatrix& omega);

}  // namespace ivspline
