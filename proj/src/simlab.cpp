#include "ivspline/simlab.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ivspline/errors.hpp"
#include "ivspline/rng.hpp"
#include "ivspline/solver.hpp"

namespace ivspline {

double true_function(TestFunction g, double z) {
  switch (g) {
    case TestFunction::g1:
      return z * z / std::sqrt(2.0);
    case TestFunction::g2:
      return std::sqrt(3.0 * std::sqrt(3.0)) * z * std::exp(-z * z / 2.0);
    case TestFunction::g3: {
      const double u = z - 1.0;
      return (std::sqrt(10.0 / 3.0) * std::log(std::abs(u) + 1.0) * sign_nonneg(u) - 0.6 * z + 2.0 * z * z * z) / 8.0;
    }
  }
  return 0.0;
}

void DgpConfig::validate() const {
  if (n < 3) throw InputError(ErrorKind::invalid_argument, "simulation sample size must be at least 3");
  if (!(std::abs(rho_ev) < 1.0)) throw InputError(ErrorKind::invalid_argument, "rho_ev must lie in (-1, 1)");
  if (!(std::abs(rho_wz) < 1.0)) throw InputError(ErrorKind::invalid_argument, "rho_wz must lie in (-1, 1)");
}

SimulatedSample generate(const DgpConfig& cfg) {
  cfg.validate();
  // Signed versions of sqrt(rho^2 / (1 - rho^2)), so negative correlations are
  // reproduced too; identical for rho >= 0.
  const double a = cfg.rho_ev / std::sqrt(1.0 - cfg.rho_ev * cfg.rho_ev);
  const double beta = cfg.rho_wz / std::sqrt(1.0 - cfg.rho_wz * cfg.rho_wz);
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Eigen::Index n = cfg.n;
  Eigen::VectorXd y(n), z(n), eps(n), truth(n);
  Eigen::MatrixXd w(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = normal(rng);
    const double vi = normal(rng);
    const double eta = normal(rng);
    w(i, 0) = wi;
    eps(i) = (a * vi + eta) / std::sqrt(1.0 + a * a);
    z(i) = (beta * wi + vi) / std::sqrt(1.0 + beta * beta);
    truth(i) = true_function(cfg.g, z(i));
    y(i) = truth(i) + eps(i);
  }
  return SimulatedSample{Dataset::create(std::move(y), std::move(z), std::move(w)), std::move(eps), std::move(truth)};
}

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::unconstrained ? "unconstrained" : "constrained";
}

Eigen::VectorXd evaluation_grid() { return Eigen::VectorXd::LinSpaced(100, -2.0, 2.0); }

namespace {

using RepFn = std::function<std::vector<std::optional<ReplicationEstimate>>(const SimulatedSample&,
                                                                            const Eigen::VectorXd&, std::uint64_t)>;

std::vector<McReport> run(const DgpConfig& cfg, const std::vector<std::string>& tags, const RepFn& fn,
                          int replications, const McOptions& options) {
  cfg.validate();
  if (replications < 2) throw InputError(ErrorKind::invalid_argument, "Monte Carlo needs at least 2 replications");
  const Eigen::VectorXd grid = evaluation_grid();
  const std::size_t k_est = tags.size();
  const auto reps = static_cast<std::size_t>(replications);

  std::vector<std::vector<std::optional<ReplicationEstimate>>> results(reps);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        DgpConfig rep_cfg = cfg;
        rep_cfg.seed = mix_seed(cfg.seed, r);
        const SimulatedSample sample = generate(rep_cfg);
        results[r] = fn(sample, grid, mix_seed(rep_cfg.seed, 0xC0FFEE));
        if (results[r].size() != k_est) throw std::logic_error("estimator count mismatch");
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  Eigen::VectorXd truth(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) truth(j) = true_function(cfg.g, grid(j));

  std::vector<McReport> reports;
  for (std::size_t e = 0; e < k_est; ++e) {
    McReport rep;
    rep.estimator_tag = tags[e];
    rep.grid = grid;
    rep.truth_curve = truth;
    // Sums are taken relative to the first good curve, which keeps identical
    // replications at exactly zero variance.
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.size());
    Eigen::VectorXd shift;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& est = results[r][e];
      if (est && est->curve.size() == grid.size() && est->curve.allFinite()) {
        if (shift.size() == 0) shift = est->curve;
        sum += est->curve - shift;
        rep.lambdas.push_back(est->lambda);
        ++rep.replications;
      } else {
        ++rep.failures;
      }
    }
    if (rep.failures > options.max_failure_rate * static_cast<double>(replications) || rep.replications < 2) {
      std::ostringstream msg;
      msg << rep.estimator_tag << ": " << rep.failures << " of " << replications << " replications failed";
      throw Error(ErrorKind::report, msg.str());
    }
    const double count = static_cast<double>(rep.replications);
    rep.mean_curve = shift + sum / count;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(grid.size());
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& est = results[r][e];
      if (est && est->curve.size() == grid.size() && est->curve.allFinite())
        sq += (est->curve - rep.mean_curve).cwiseAbs2();
    }
    rep.variance_curve = sq / count;
    rep.bias_sq_curve = (rep.mean_curve - truth).cwiseAbs2();
    rep.mse_curve = rep.bias_sq_curve + rep.variance_curve;
    rep.bias_sq = rep.bias_sq_curve.mean();
    rep.variance = rep.variance_curve.mean();
    rep.mse = rep.mse_curve.mean();
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace

std::vector<McReport> monte_carlo(const DgpConfig& cfg, const std::vector<std::pair<std::string, Estimator>>& estimators,
                                  int replications, const McOptions& options) {
  std::vector<std::string> tags;
  for (const auto& [tag, est] : estimators) tags.push_back(tag);
  const RepFn fn = [&estimators](const SimulatedSample& s, const Eigen::VectorXd& grid, std::uint64_t seed) {
    std::vector<std::optional<ReplicationEstimate>> out;
    for (const auto& [tag, est] : estimators) out.push_back(est(s, grid, seed));
    return out;
  };
  return run(cfg, tags, fn, replications, options);
}

std::vector<McReport> monte_carlo(const DgpConfig& cfg, const std::vector<EstimatorKind>& kinds, int replications,
                                  const McOptions& options) {
  std::vector<std::string> tags;
  for (EstimatorKind k : kinds) tags.push_back(to_string(k));
  // Lambda is chosen once per sample by CV on the unconstrained problem and
  // shared by both estimators.
  const RepFn fn = [&kinds, &options](const SimulatedSample& s, const Eigen::VectorXd& grid, std::uint64_t seed) {
    std::vector<std::optional<ReplicationEstimate>> out(kinds.size());
    double lambda = 0.0;
    std::optional<IvSplineProblem> problem;
    try {
      CvConfig cv = options.cv;
      cv.seed = seed;
      lambda = cross_validate(s.data, options.kernel, cv).lambda_star;
      problem.emplace(s.data, options.kernel);
    } catch (const Error&) {
      return out;
    }
    for (std::size_t e = 0; e < kinds.size(); ++e) {
      try {
        const SplineFit f = kinds[e] == EstimatorKind::unconstrained
                                ? problem->fit(lambda)
                                : fit_monotone(*problem, lambda, options.direction).fit;
        out[e] = ReplicationEstimate{evaluate(f, grid), lambda};
      } catch (const Error&) {
        out[e] = std::nullopt;
      }
    }
    return out;
  };
  return run(cfg, tags, fn, replications, options);
}

McReport monte_carlo(const DgpConfig& cfg, EstimatorKind kind, int replications, const CvConfig& cv) {
  McOptions options;
  options.cv = cv;
  return monte_carlo(cfg, std::vector<EstimatorKind>{kind}, replications, options).front();
}

std::string report_csv(const McReport& report) {
  std::ostringstream out;
  char buf[128];
  out << "z,bias_sq,variance,mse\n";
  for (Eigen::Index j = 0; j < report.grid.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", report.grid(j), report.bias_sq_curve(j),
                  report.variance_curve(j), report.mse_curve(j));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "ALL,%.17g,%.17g,%.17g\n", report.bias_sq, report.variance, report.mse);
  out << buf;
  return out.str();
}

void write_report_csv(const McReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError(ErrorKind::schema, "cannot write \"" + path + "\"");
  out << report_csv(report);
}

}  // namespace ivspline
