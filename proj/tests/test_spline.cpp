#include <cmath>
#include <random>

#include "doctest.h"
#include "ivspline/errors.hpp"
#include "ivspline/solver.hpp"
#include "ivspline/spline.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"

using namespace ivspline;

namespace {

/// Random delta satisfying both constraints: project onto null(Z').
Eigen::VectorXd feasible_delta(const Eigen::VectorXd& z, Rng& rng) {
  std::normal_distribution<double> normal;
  const Eigen::Index n = z.size();
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  Eigen::MatrixXd zd(n, 2);
  zd.col(0).setOnes();
  zd.col(1) = z;
  return v - zd * zd.colPivHouseholderQr().solve(v);
}

SplineFit random_fit(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  SplineFit fit;
  fit.knots.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) fit.knots(i) = normal(rng);
  fit.delta = feasible_delta(fit.knots, rng);
  fit.a << normal(rng), normal(rng);
  fit.lambda = 1.0;
  return fit;
}

}  // namespace

TEST_CASE("build_design entries") {
  Eigen::VectorXd z(3);
  z << 0.0, 0.5, 1.0;
  const DesignMatrices d = build_design(z);
  CHECK(d.e(0, 1) == doctest::Approx(0.125 / 12.0).epsilon(1e-15));
  CHECK(d.e(0, 2) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(d.d(0, 1) == doctest::Approx(-0.0625).epsilon(1e-15));
  CHECK(d.d(1, 0) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(d.zdesign(2, 0) == 1.0);
  CHECK(d.zdesign(2, 1) == 1.0);
  CHECK(d.o(1, 0) == 0.0);
  CHECK(d.o(1, 1) == 1.0);
  CHECK_THROWS_AS(build_design(Eigen::VectorXd::Zero(2)), InputError);
}

TEST_CASE("design matrix invariants") {
  Rng rng(1);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd z(15);
    for (Eigen::Index i = 0; i < 15; ++i) z(i) = normal(rng);
    z(3) = z(7);  // duplicates are allowed
    const DesignMatrices d = build_design(z);
    CHECK(d.e.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.d.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.e - d.e.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.e.minCoeff() >= 0.0);
    CHECK((d.d + d.d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(d.zdesign);
    CHECK(lu.rank() == 2);
  }
}

TEST_CASE("evaluate on the linear part") {
  SplineFit fit;
  fit.knots = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  fit.delta = Eigen::VectorXd::Zero(4);
  fit.a << 2.0, 3.0;
  CHECK(evaluate(fit, 1.5) == doctest::Approx(6.5).epsilon(1e-15));
  for (double z : {-5.0, 0.0, 0.3, 9.0}) {
    CHECK(evaluate_derivative(fit, z) == 3.0);
    CHECK(evaluate_second_derivative(fit, z) == 0.0);
  }
  const Eigen::VectorXd zs = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  const Eigen::VectorXd vals = evaluate(fit, zs);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(vals(i) == doctest::Approx(2.0 + 3.0 * zs(i)));
  CHECK(roughness(fit.delta, build_design(fit.knots).e) == 0.0);
}

TEST_CASE("two knots only admit the straight line") {
  // With two knots the constraints force delta = 0.
  Eigen::VectorXd z(2);
  z << 0.0, 1.0;
  Eigen::MatrixXd zd(2, 2);
  zd << 1.0, 0.0, 1.0, 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(zd.transpose());
  CHECK(lu.dimensionOfKernel() == 0);
  SplineFit fit;
  fit.knots = z;
  fit.delta = Eigen::VectorXd::Zero(2);
  fit.a = zd.fullPivLu().solve(Eigen::Vector2d(0.0, 1.0));
  CHECK(evaluate(fit, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("sign convention") {
  CHECK(sign_nonneg(0.0) == 1.0);
  CHECK(sign_nonneg(-0.0) == 1.0);
  CHECK(sign_nonneg(-1e-300) == -1.0);
  CHECK(sign_nonneg(2.0) == 1.0);
}

TEST_CASE("roughness hand expansion") {
  Eigen::VectorXd z(3), delta(3);
  z << 0.0, 0.5, 1.0;
  delta << 1.0, -2.0, 1.0;
  const DesignMatrices d = build_design(z);
  const double hand = 2.0 * (-2.0 * 0.125 / 12.0 + 1.0 / 12.0 - 2.0 * 0.125 / 12.0);
  CHECK(roughness(delta, d.e) == doctest::Approx(hand).epsilon(1e-14));
  CHECK(hand == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(roughness(delta, d.e) == doctest::Approx(oracle::piecewise_roughness(delta, z)).epsilon(1e-12));
  CHECK_THROWS_AS(roughness(Eigen::VectorXd::Zero(2), d.e), InputError);
}

TEST_CASE("random valid splines satisfy the identity checks") {
  Rng rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    const SplineFit fit = random_fit(4 + rep % 12, rng);
    const checks::SplineIdentity s = checks::spline_identity(fit);
    INFO(checks::describe(s));
    CHECK(checks::passes(s));
    const double rough = roughness(fit.delta, build_design(fit.knots).e);
    CHECK(rough >= -1e-12);
    CHECK(rough == doctest::Approx(oracle::piecewise_roughness(fit.delta, fit.knots)).epsilon(1e-10));
  }
}

TEST_CASE("extrapolation is linear beyond the knots") {
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    const SplineFit fit = random_fit(4, rng);
    const double hi = fit.knots.maxCoeff();
    const double lo = fit.knots.minCoeff();
    const double scale = 1.0 + fit.delta.lpNorm<1>() * std::pow(hi - lo + 5.0, 3);
    for (double t : {0.5, 2.0, 5.0}) {
      const double line_hi = evaluate(fit, hi) + t * evaluate_derivative(fit, hi);
      const double line_lo = evaluate(fit, lo) - t * evaluate_derivative(fit, lo);
      CHECK(std::abs(evaluate(fit, hi + t) - line_hi) <= 1e-12 * scale);
      CHECK(std::abs(evaluate(fit, lo - t) - line_lo) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("derivative is continuous at knots") {
  Rng rng(9);
  const SplineFit fit = random_fit(6, rng);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double z = fit.knots(i);
    const double left = evaluate_derivative(fit, std::nextafter(z, -1e9));
    const double right = evaluate_derivative(fit, std::nextafter(z, 1e9));
    CHECK(std::abs(left - right) <= 1e-12 * (1.0 + std::abs(evaluate_derivative(fit, z))));
  }
}

TEST_CASE("natural interpolant beats spline plus bump") {
  // Interpolation limit of the solver yields the natural spline through the
  // data; adding any smooth bump that vanishes at the knots must not lower
  // the roughness.
  Rng rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 3 + rep % 4;
    const Dataset sub = oracle::separated_instance(n, 500 + static_cast<std::uint64_t>(rep));
    const SplineFit fit = IvSplineProblem(sub, KernelSpec{}).fit(1e-10);
    const double base = roughness(fit.delta, build_design(fit.knots).e);

    // bump(z) = c * prod (z - Z_i) * exp(-z^2), vanishing at every knot.
    const double c = unif(rng) * 0.5;
    auto second = [&](double x) {
      const double h = 1e-4;
      auto bump = [&](double t) {
        double prod = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) prod *= t - fit.knots(i);
        return c * prod * std::exp(-t * t);
      };
      return evaluate_second_derivative(fit, x) + (bump(x + h) - 2.0 * bump(x) + bump(x - h)) / (h * h);
    };
    // Roughness of the perturbed interpolant over a wide interval (the bump
    // is negligible beyond it), Simpson's rule.
    const double a = -12.0, b = 12.0;
    const int m = 24000;
    const double step = (b - a) / m;
    double perturbed = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double x = a + k * step;
      const double wgt = (k == 0 || k == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      perturbed += wgt * second(x) * second(x);
    }
    perturbed *= step / 3.0;
    CHECK(base <= perturbed + 1e-6 * (1.0 + base));
  }
}

TEST_CASE("permuting rows permutes delta") {
  const Dataset ds = oracle::separated_instance(12, 5);
  std::vector<Eigen::Index> perm{11, 3, 0, 7, 1, 9, 2, 10, 4, 8, 5, 6};
  const Dataset permuted = ds.subset(perm);
  const SplineFit f1 = IvSplineProblem(ds, KernelSpec{}).fit(0.05);
  const SplineFit f2 = IvSplineProblem(permuted, KernelSpec{}).fit(0.05);
  const double scale = 1.0 + f1.delta.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < perm.size(); ++k) {
    CHECK(std::abs(f2.delta(static_cast<Eigen::Index>(k)) - f1.delta(perm[k])) <= 1e-9 * scale);
  }
  for (double z : {-2.5, -1.0, 0.0, 0.7, 1.9, 3.0}) {
    CHECK(std::abs(evaluate(f1, z) - evaluate(f2, z)) <= 1e-9 * (1.0 + std::abs(evaluate(f1, z))));
  }
}
