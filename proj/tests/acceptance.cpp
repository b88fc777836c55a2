// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ivspline/ivspline.hpp"
#include "support/checks.hpp"
#include "support/monotone_cases.hpp"
#include "support/oracles.hpp"

using namespace ivspline;

namespace {

// Tolerances and sizes.
constexpr int kTableReps = 200;
constexpr double kBiasMax = 0.01;
constexpr double kVarLo = 0.04, kVarHi = 0.10;
constexpr double kMseLo = 0.04, kMseHi = 0.10;
constexpr double kVarianceRatio = 0.75;
constexpr double kOracleRel = 1e-6;
constexpr double kClosedFormRel = 1e-8;
constexpr double kInterpolation = 1e-4;
constexpr double kDeltaLimit = 1e-6;
constexpr double kLinearLimit = 1e-4;
constexpr double kQuadratureRel = 1e-6;
constexpr double kUniform = 1e-6;
constexpr double kTiltSlack = 1e-8;
constexpr double kKnotSlack = 1e-7;
constexpr int kSmokeReps = 100;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Fits produced by criteria 3-5, re-examined by criterion 6.
std::vector<SplineFit> produced_fits;

Outcome table_spot_check() {
  DgpConfig dgp;
  dgp.n = 200;
  dgp.rho_ev = 0.5;
  dgp.rho_wz = 0.9;
  dgp.g = TestFunction::g1;
  dgp.seed = 20240601;
  CvConfig cv;
  cv.seed = dgp.seed;
  const McReport r = monte_carlo(dgp, EstimatorKind::unconstrained, kTableReps, cv);
  Outcome o;
  o.pass = r.bias_sq <= kBiasMax && r.variance >= kVarLo && r.variance <= kVarHi && r.mse >= kMseLo &&
           r.mse <= kMseHi && r.replications + r.failures == kTableReps;
  o.detail = "bias2=" + fmt("%.4f", r.bias_sq) + " var=" + fmt("%.4f", r.variance) + " mse=" + fmt("%.4f", r.mse) +
             " reps=" + std::to_string(r.replications) + " failures=" + std::to_string(r.failures);
  return o;
}

Outcome monotonicity_gain() {
  DgpConfig dgp;
  dgp.n = 200;
  dgp.rho_ev = 0.5;
  dgp.rho_wz = 0.9;
  dgp.g = TestFunction::g3;
  dgp.seed = 20240602;
  McOptions opts;
  opts.cv.seed = dgp.seed;
  const auto reports =
      monte_carlo(dgp, {EstimatorKind::unconstrained, EstimatorKind::constrained}, kTableReps, opts);
  const McReport& u = reports[0];
  const McReport& c = reports[1];
  Outcome o;
  o.pass = c.variance <= kVarianceRatio * u.variance && c.bias_sq <= kBiasMax;
  o.detail = "var_cons=" + fmt("%.4f", c.variance) + " var_unc=" + fmt("%.4f", u.variance) +
             " ratio=" + fmt("%.3f", c.variance / u.variance) + " bias2_cons=" + fmt("%.4f", c.bias_sq) +
             " bias2_unc=" + fmt("%.4f", u.bias_sq) + " failures=" + std::to_string(c.failures);
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = oracle::gaussian_instance(8, 3000 + seed);
    const IvSplineProblem problem(ds, KernelSpec{});
    const double lambda = 0.1;
    const SplineFit f = problem.fit(lambda);
    produced_fits.push_back(f);
    const oracle::QpSolution qp = oracle::brute_force_qp(ds.y, ds.z, problem.omega().values, lambda);
    worst = std::max(worst, rel(penalized_objective(problem, f, ds.y), qp.objective));
  }
  o.pass = worst <= kOracleRel;
  o.detail = "max relative objective gap " + fmt("%.2e", worst) + " over 20 instances";
  return o;
}

Outcome closed_form_cross_check() {
  Outcome o;
  double worst = 0.0;
  Rng rng(4000);
  std::uniform_int_distribution<Eigen::Index> size(5, 40);
  std::uniform_real_distribution<double> log_lambda(-4.0, 1.0);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Eigen::Index n = k < 2 ? (k == 0 ? 5 : 40) : size(rng);
    const Dataset ds = oracle::gaussian_instance(n, 4000 + k);
    const IvSplineProblem problem(ds, KernelSpec{});
    const double lambda = std::pow(10.0, log_lambda(rng));
    const SplineFit f = problem.fit(lambda);
    produced_fits.push_back(f);
    const Eigen::VectorXd block = problem.design().zdesign * f.a + problem.design().e * f.delta;
    const Eigen::VectorXd closed = problem.fitted_values(lambda);
    worst = std::max(worst, (block - closed).norm() / closed.norm());
  }
  o.pass = worst <= kClosedFormRel;
  o.detail = "max relative gap " + fmt("%.2e", worst) + " over 50 instances";
  return o;
}

Outcome limit_behavior() {
  Outcome o;
  double worst_interp = 0.0, worst_delta = 0.0, worst_a = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = oracle::separated_instance(10, 5000 + seed);
    const IvSplineProblem problem(ds, KernelSpec{});

    const SplineFit small = problem.fit(1e-10);
    produced_fits.push_back(small);
    const double scale = std::max(1.0, ds.y.lpNorm<Eigen::Infinity>());
    worst_interp = std::max(worst_interp, (evaluate(small, ds.z) - ds.y).cwiseAbs().maxCoeff() / scale);

    const SplineFit large = problem.fit(1e10);
    produced_fits.push_back(large);
    const Eigen::MatrixXd& zd = problem.design().zdesign;
    const Eigen::MatrixXd& om = problem.omega().values;
    const Eigen::Vector2d a_lim = (zd.transpose() * om * zd).ldlt().solve(zd.transpose() * om * ds.y);
    worst_delta = std::max(worst_delta, large.delta.norm() / ds.y.norm());
    worst_a = std::max(worst_a, (large.a - a_lim).cwiseAbs().maxCoeff());
  }
  o.pass = worst_interp <= kInterpolation && worst_delta <= kDeltaLimit && worst_a <= kLinearLimit;
  o.detail = "interp=" + fmt("%.2e", worst_interp) + " |delta|/|Y|=" + fmt("%.2e", worst_delta) +
             " a_gap=" + fmt("%.2e", worst_a);
  return o;
}

Outcome spline_identities() {
  Outcome o;
  checks::SplineIdentity worst;
  for (const SplineFit& f : produced_fits) {
    const checks::SplineIdentity s = checks::spline_identity(f);
    worst.naturality = std::max(worst.naturality, s.naturality);
    worst.constraints = std::max(worst.constraints, s.constraints);
    worst.roughness = std::max(worst.roughness, s.roughness);
    worst.derivative = std::max(worst.derivative, s.derivative);
  }
  o.pass = !produced_fits.empty() && checks::passes(worst);
  o.detail = std::to_string(produced_fits.size()) + " fits, worst naturality=" + fmt("%.1e", worst.naturality) +
             " constraints=" + fmt("%.1e", worst.constraints) + " roughness=" + fmt("%.1e", worst.roughness) +
             " derivative=" + fmt("%.1e", worst.derivative);
  return o;
}

Outcome quadrature_agreement() {
  Outcome o;
  Rng rng(6000);
  std::normal_distribution<double> normal;
  KernelSpec spec;
  spec.standardize = false;
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd w(5, 1);
    Eigen::VectorXd r(5);
    for (Eigen::Index i = 0; i < 5; ++i) {
      w(i, 0) = normal(rng);
      r(i) = normal(rng);
    }
    const double mn = mn_criterion(r, build_omega(w, spec));
    worst = std::max(worst, rel(mn, oracle::mn_by_quadrature(r, w.col(0), spec.scale())));
  }
  o.pass = worst <= kQuadratureRel;
  o.detail = "max relative gap " + fmt("%.2e", worst) + " over 10 instances";
  return o;
}

Outcome monotone_solver() {
  Outcome o;
  // Inactive constraints: uniform weights.
  const Dataset base = oracle::separated_instance(30, 7000, 0.0);
  Rng rng(7000);
  std::normal_distribution<double> normal;
  Eigen::VectorXd y = (0.3 + 2.0 * base.z.array()).matrix();
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.05 * normal(rng);
  const IvSplineProblem flat(base.with_outcome(y), KernelSpec{});
  const MonotoneFit mono = fit_monotone(flat, 1.0, MonotoneDirection::increasing);
  const double uniform_gap = (mono.weights.p.array() - 1.0 / 30.0).abs().maxCoeff();

  // Active constraints: rejection-sampling oracle over the simplex.
  double worst_excess = -INFINITY, worst_knot = 0.0;
  int instances = 0, samples = 0;
  for (const cases::ActiveInstance& inst : cases::active_instances(8, 10)) {
    ++instances;
    const IvSplineProblem problem(inst.data, KernelSpec{});
    const Eigen::MatrixXd g = cases::constraint_matrix(problem, inst.lambda, MonotoneDirection::increasing);
    const TiltWeights t = solve_tilt(g);
    const Eigen::Index n = inst.data.size();
    double best_sample = INFINITY;
    int accepted = 0;
    for (int draw = 0; draw < 2000000 && accepted < 200; ++draw) {
      const Eigen::VectorXd q = oracle::dirichlet_one(n, rng);
      if ((g * q).minCoeff() < 0.0) continue;
      ++accepted;
      best_sample = std::min(best_sample, tilt_objective(q));
    }
    samples += accepted;
    if (accepted == 0) {
      o.pass = false;
      continue;
    }
    worst_excess = std::max(worst_excess, t.objective - best_sample);
    const MonotoneFit mf = fit_monotone(problem, inst.lambda, MonotoneDirection::increasing);
    const Eigen::VectorXd slopes = evaluate_derivative(mf.fit, inst.data.z);
    worst_knot = std::max(worst_knot, -slopes.minCoeff() / (1.0 + slopes.cwiseAbs().maxCoeff()));
  }
  o.pass = o.pass && instances == 10 && uniform_gap <= kUniform && worst_excess <= kTiltSlack &&
           worst_knot <= kKnotSlack;
  o.detail = "uniform_gap=" + fmt("%.1e", uniform_gap) + " objective-minus-oracle=" + fmt("%.2e", worst_excess) +
             " knot_violation=" + fmt("%.1e", std::max(0.0, worst_knot)) + " (" + std::to_string(instances) +
             " instances, " + std::to_string(samples) + " feasible samples)";
  return o;
}

Outcome dgp_fidelity() {
  Outcome o;
  const std::vector<std::pair<double, double>> pairs{{0.5, 0.9}, {0.2, 0.5}, {-0.7, 0.3}};
  std::ostringstream detail;
  std::uint64_t seed = 8000;
  for (const auto& [ev, wz] : pairs) {
    DgpConfig cfg;
    cfg.n = 100000;
    cfg.rho_ev = ev;
    cfg.rho_wz = wz;
    cfg.seed = seed++;
    const SimulatedSample s = generate(cfg);
    const double n = static_cast<double>(cfg.n);
    auto var = [&](const Eigen::VectorXd& x) { return (x.array() - x.mean()).square().sum() / (n - 1.0); };
    const Eigen::ArrayXd dw = s.data.w.col(0).array() - s.data.w.col(0).mean();
    const Eigen::ArrayXd dz = s.data.z.array() - s.data.z.mean();
    const double corr = (dw * dz).sum() / std::sqrt(dw.square().sum() * dz.square().sum());
    const double se_var = std::sqrt(2.0 / (n - 1.0));
    const double se_corr = (1.0 - wz * wz) / std::sqrt(n);
    const double tz = (var(s.data.z) - 1.0) / se_var;
    const double te = (var(s.epsilon) - 1.0) / se_var;
    const double tc = (corr - wz) / se_corr;
    o.pass = o.pass && std::abs(tz) <= 3.0 && std::abs(te) <= 3.0 && std::abs(tc) <= 3.0;
    detail << "(" << ev << "," << wz << "): z-scores " << fmt("%.2f", tz) << "/" << fmt("%.2f", te) << "/"
           << fmt("%.2f", tc) << "  ";
  }
  o.detail = detail.str();
  return o;
}

Outcome mse_smoke() {
  auto run = [](Eigen::Index n) {
    DgpConfig dgp;
    dgp.n = n;
    dgp.g = TestFunction::g1;
    dgp.seed = 9000 + static_cast<std::uint64_t>(n);
    CvConfig cv;
    cv.seed = dgp.seed;
    return monte_carlo(dgp, EstimatorKind::unconstrained, kSmokeReps, cv);
  };
  const McReport small = run(100);
  const McReport large = run(400);
  Outcome o;
  o.pass = large.mse < small.mse;
  o.detail = "mse(n=100)=" + fmt("%.4f", small.mse) + " mse(n=400)=" + fmt("%.4f", large.mse);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 table spot-check (g1, n=200, 200 reps)", table_spot_check},
      {"2 monotonicity gain (g3, n=200, 200 reps)", monotonicity_gain},
      {"3 oracle equivalence (n=8, 20 instances)", oracle_equivalence},
      {"4 closed-form cross-check (50 instances)", closed_form_cross_check},
      {"5 limit behavior (n=10, 10 instances)", limit_behavior},
      {"6 spline identities on fits from 3-5", spline_identities},
      {"7 V-statistic vs quadrature (n=5, 10 instances)", quadrature_agreement},
      {"8 monotone solver correctness", monotone_solver},
      {"9 DGP fidelity (n=1e5, 3 pairs)", dgp_fidelity},
      {"smoke MSE(n=400) < MSE(n=100), g1, 100 reps", mse_smoke},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %s  [%s] (%.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
