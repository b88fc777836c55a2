#pragma once

#include <Eigen/Dense>

namespace ivspline {

/// Matrices of the natural cubic spline basis g(z) = a0 + a1 z + 1/12 sum delta_i |z - Z_i|^3,
/// with knots kept in input order.
struct DesignMatrices {
  Eigen::MatrixXd zdesign;  // [1, Z_i]
  Eigen::MatrixXd e;        // |Z_i - Z_j|^3 / 12
  Eigen::MatrixXd d;        // sign(Z_i - Z_j) |Z_i - Z_j|^2 / 4
  Eigen::MatrixXd o;        // rows (0, 1)

  Eigen::Index size() const { return e.rows(); }
};

DesignMatrices build_design(const Eigen::VectorXd& z);

struct FitDiagnostics {
  double mn_value = 0.0;
  double roughness = 0.0;
  double constraint_residual = 0.0;
  double jitter_applied = 0.0;
  double condition_estimate = 0.0;
};

struct SplineFit {
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::VectorXd delta;
  Eigen::VectorXd knots;
  double lambda = 0.0;
  FitDiagnostics diagnostics;
};

/// sign(u) = 1(u >= 0) - 1(u < 0); zero maps to +1.
inline double sign_nonneg(double u) { return u >= 0.0 ? 1.0 : -1.0; }

double evaluate(const SplineFit& fit, double z);
double evaluate_derivative(const SplineFit& fit, double z);
double evaluate_second_derivative(const SplineFit& fit, double z);

Eigen::VectorXd evaluate(const SplineFit& fit, const Eigen::VectorXd& z);
Eigen::VectorXd evaluate_derivative(const SplineFit& fit, const Eigen::VectorXd& z);

/// delta' E delta, the integrated squared second derivative.
double roughness(const Eigen::VectorXd& delta, const Eigen::MatrixXd& e);

/// max(|sum delta_i|, |sum delta_i Z_i|).
double constraint_residual(const Eigen::VectorXd& delta, const Eigen::VectorXd& knots);

}  // namespace ivspline
