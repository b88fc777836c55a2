#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ivspline/datamodel.hpp"
#include "ivspline/kernel.hpp"
#include "ivspline/monotone.hpp"
#include "ivspline/selection.hpp"

namespace ivspline {

enum class TestFunction { g1, g2, g3 };

/// g1(z) = z^2 / sqrt(2); g2(z) = sqrt(3 sqrt(3)) z exp(-z^2 / 2);
/// g3(z) = (sqrt(10/3) log(|z-1|+1) sign(z-1) - 0.6 z + 2 z^3) / 8.
double true_function(TestFunction g, double z);

struct DgpConfig {
  Eigen::Index n = 200;
  double rho_ev = 0.5;  // endogeneity, corr(eps, V)
  double rho_wz = 0.9;  // instrument strength, corr(W, Z)
  TestFunction g = TestFunction::g1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimulatedSample {
  Dataset data;
  Eigen::VectorXd epsilon;
  Eigen::VectorXd truth;  // g(Z_i)
};

/// eps = (aV + eta)/sqrt(1+a^2), Z = (beta W + V)/sqrt(1+beta^2), Y = g(Z) + eps,
/// with (W, V, eta) iid standard normal.
SimulatedSample generate(const DgpConfig& cfg);

enum class EstimatorKind { unconstrained, constrained };

std::string to_string(EstimatorKind kind);

struct McReport {
  Eigen::VectorXd grid;
  Eigen::VectorXd bias_sq_curve;
  Eigen::VectorXd variance_curve;
  Eigen::VectorXd mse_curve;
  Eigen::VectorXd mean_curve;
  Eigen::VectorXd truth_curve;
  double bias_sq = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  int replications = 0;  // successful replications
  int failures = 0;
  std::string estimator_tag;
  std::string variance_divisor = "1/R";
  std::vector<double> lambdas;  // selected lambda per successful replication
};

/// 100 equispaced points on [-2, 2].
Eigen::VectorXd evaluation_grid();

/// One replication's estimate on the grid plus the lambda it used;
/// std::nullopt marks a failed replication.
struct ReplicationEstimate {
  Eigen::VectorXd curve;
  double lambda = 0.0;
};
using Estimator = std::function<std::optional<ReplicationEstimate>(const SimulatedSample&, const Eigen::VectorXd& grid,
                                                                   std::uint64_t stream_seed)>;

struct McOptions {
  KernelSpec kernel;
  CvConfig cv;
  MonotoneDirection direction = MonotoneDirection::increasing;
  unsigned threads = 0;  // 0 = hardware concurrency
  double max_failure_rate = 0.05;
};

/// Runs several estimators on the same simulated samples.
std::vector<McReport> monte_carlo(const DgpConfig& cfg, const std::vector<std::pair<std::string, Estimator>>& estimators,
                                  int replications, const McOptions& options = {});

std::vector<McReport> monte_carlo(const DgpConfig& cfg, const std::vector<EstimatorKind>& kinds, int replications,
                                  const McOptions& options = {});

McReport monte_carlo(const DgpConfig& cfg, EstimatorKind kind, int replications, const CvConfig& cv);

void write_report_csv(const McReport& report, const std::string& path);
std::string report_csv(const McReport& report);

}  // namespace ivspline
