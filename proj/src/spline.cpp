#include "ivspline/spline.hpp"

#include <cmath>
#include <string>

#include "ivspline/errors.hpp"

namespace ivspline {

DesignMatrices build_design(const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size();
  if (n < 3) throw InputError(ErrorKind::size, "build_design: need at least 3 knots, got " + std::to_string(n));
  DesignMatrices dm;
  dm.zdesign.resize(n, 2);
  dm.zdesign.col(0).setOnes();
  dm.zdesign.col(1) = z;
  dm.o.resize(n, 2);
  dm.o.col(0).setZero();
  dm.o.col(1).setOnes();
  dm.e.resize(n, n);
  dm.d.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double u = z(i) - z(j);
      const double au = std::abs(u);
      dm.e(i, j) = au * au * au / 12.0;
      dm.d(i, j) = 0.25 * sign_nonneg(u) * au * au;
    }
  }
  return dm;
}

double evaluate(const SplineFit& fit, double z) {
  double cubic = 0.0;
  for (Eigen::Index i = 0; i < fit.delta.size(); ++i) {
    const double u = std::abs(z - fit.knots(i));
    cubic += fit.delta(i) * u * u * u;
  }
  return fit.a(0) + fit.a(1) * z + cubic / 12.0;
}

double evaluate_derivative(const SplineFit& fit, double z) {
  double quad = 0.0;
  for (Eigen::Index i = 0; i < fit.delta.size(); ++i) {
    const double u = z - fit.knots(i);
    quad += fit.delta(i) * sign_nonneg(u) * u * u;
  }
  return fit.a(1) + 0.25 * quad;
}

double evaluate_second_derivative(const SplineFit& fit, double z) {
  double lin = 0.0;
  for (Eigen::Index i = 0; i < fit.delta.size(); ++i) lin += fit.delta(i) * std::abs(z - fit.knots(i));
  return 0.5 * lin;
}

Eigen::VectorXd evaluate(const SplineFit& fit, const Eigen::VectorXd& z) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) out(k) = evaluate(fit, z(k));
  return out;
}

Eigen::VectorXd evaluate_derivative(const SplineFit& fit, const Eigen::VectorXd& z) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) out(k) = evaluate_derivative(fit, z(k));
  return out;
}

double roughness(const Eigen::VectorXd& delta, const Eigen::MatrixXd& e) {
  if (e.rows() != delta.size() || e.cols() != delta.size()) {
    throw InputError(ErrorKind::dimension, "roughness: delta length does not match E");
  }
  return delta.dot(e * delta);
}

double constraint_residual(const Eigen::VectorXd& delta, const Eigen::VectorXd& knots) {
  return std::max(std::abs(delta.sum()), std::abs(delta.dot(knots)));
}

}  // namespace ivspline
