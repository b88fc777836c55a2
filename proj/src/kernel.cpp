#include "ivspline/kernel.hpp"

#include <cmath>
#include <string>

#include "ivspline/errors.hpp"

namespace ivspline {

void KernelSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InputError(ErrorKind::invalid_argument, "kernel variance must be positive and finite");
  }
}

double KernelSpec::scale() const { return std::sqrt(variance / 2.0); }

double omega_weight(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& d) {
  const double b = spec.scale();
  double log_weight = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) log_weight += -std::log(2.0 * b) - std::abs(d(k)) / b;
  return std::exp(log_weight);
}

Eigen::MatrixXd OmegaMatrix::inverse() const {
  return cholesky.solve(Eigen::MatrixXd::Identity(size(), size()));
}

namespace {

// Eigen's LLT only reports failure on a non-positive pivot; pivots this small
// relative to the diagonal are treated as failure as well.
bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt, double mean_diag) {
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
  if (!pivots.allFinite()) return false;
  return pivots.cwiseAbs2().minCoeff() > 1e-12 * mean_diag;
}

}  // namespace

OmegaMatrix factor_omega(Eigen::MatrixXd values) {
  const Eigen::Index n = values.rows();
  OmegaMatrix out;
  out.values = std::move(values);
  const double mean_diag = out.values.trace() / static_cast<double>(n);

  out.cholesky.compute(out.values);
  if (factor_ok(out.cholesky, mean_diag)) return out;

  for (double tau = kJitterStart; tau <= kJitterMax * (1.0 + 1e-9); tau *= 10.0) {
    const double jitter = tau * mean_diag;
    Eigen::MatrixXd shifted = out.values;
    shifted.diagonal().array() += jitter;
    out.cholesky.compute(shifted);
    if (factor_ok(out.cholesky, mean_diag)) {
      out.jitter_applied = jitter;
      return out;
    }
  }
  throw SolverError(ErrorKind::singular_kernel,
                    "weight matrix is singular beyond the jitter cap; instrument rows are effectively duplicated");
}

OmegaMatrix build_omega(const Eigen::MatrixXd& w, const KernelSpec& spec) {
  spec.validate();
  const Eigen::Index n = w.rows();
  if (n < 1) throw InputError(ErrorKind::size, "build_omega: empty instrument matrix");
  Eigen::MatrixXd x = w;
  if (spec.standardize && n >= 2) x = standardize_instruments(w).w_std;

  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  Eigen::MatrixXd values(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values(i, i) = norm * omega_weight(spec, Eigen::RowVectorXd::Zero(x.cols()));
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = norm * omega_weight(spec, x.row(i) - x.row(j));
      values(i, j) = v;
      values(j, i) = v;
    }
  }
  return factor_omega(std::move(values));
}

OmegaMatrix build_omega(const Dataset& ds, const KernelSpec& spec) { return build_omega(ds.w, spec); }

double mn_criterion(const Eigen::Ref<const Eigen::VectorXd>& residuals, const OmegaMatrix& omega) {
  if (residuals.size() != omega.size()) {
    throw InputError(ErrorKind::dimension, "mn_criterion: residual length " + std::to_string(residuals.size()) +
                                               " does not match weight matrix size " + std::to_string(omega.size()));
  }
  return residuals.dot(omega.values * residuals);
}

}  // namespace ivspline
