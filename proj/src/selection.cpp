#include "ivspline/selection.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "ivspline/errors.hpp"
#include "ivspline/rng.hpp"
#include "ivspline/solver.hpp"

namespace ivspline {

std::vector<double> default_grid() {
  constexpr int kPoints = 400;
  constexpr double kLow = 1e-5;
  constexpr double kHigh = 0.7;
  std::vector<double> grid(kPoints);
  for (int k = 0; k < kPoints; ++k) {
    const double p = kLow + k * (kHigh - kLow) / (kPoints - 1);
    grid[static_cast<std::size_t>(k)] = p / (1.0 - p);
  }
  return grid;
}

void CvConfig::validate() const {
  if (folds < 2) throw InputError(ErrorKind::invalid_argument, "cross-validation needs at least 2 folds");
  if (grid.empty()) throw InputError(ErrorKind::invalid_argument, "lambda grid is empty");
  for (double g : grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw InputError(ErrorKind::invalid_argument, "lambda grid values must be positive and finite");
    }
  }
}

std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(seed);
  shuffle(perm, rng);
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    // For two folds this puts the first ceil(n/2) permuted rows in fold 0.
    assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] =
        static_cast<int>((pos * folds) / n);
  }
  return assignment;
}

CvResult cross_validate(const Dataset& ds, const KernelSpec& spec, const CvConfig& cfg) {
  cfg.validate();
  return cross_validate(ds, spec, cfg, assign_folds(ds.size(), cfg.folds, cfg.seed));
}

CvResult cross_validate(const Dataset& ds, const KernelSpec& spec, const CvConfig& cfg,
                        const std::vector<int>& fold_assignment) {
  cfg.validate();
  const Eigen::Index n = ds.size();
  if (static_cast<Eigen::Index>(fold_assignment.size()) != n) {
    throw InputError(ErrorKind::dimension, "fold assignment length does not match the data");
  }
  if (n < 3 * cfg.folds) {
    throw InputError(ErrorKind::size, "cross-validation needs at least 3 observations per fold");
  }

  const OmegaMatrix full_omega = build_omega(ds, spec);
  const std::size_t grid_size = cfg.grid.size();
  Eigen::MatrixXd predictions = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(grid_size));
  std::vector<bool> valid(grid_size, true);

  for (int k = 0; k < cfg.folds; ++k) {
    std::vector<Eigen::Index> train, held_out;
    for (Eigen::Index i = 0; i < n; ++i) (fold_assignment[static_cast<std::size_t>(i)] == k ? held_out : train).push_back(i);
    if (train.size() < 3 || held_out.empty()) {
      throw InputError(ErrorKind::size, "fold " + std::to_string(k) + " is too small");
    }

    std::optional<IvSplineProblem> problem;
    std::optional<LambdaPath> path;
    try {
      problem.emplace(ds.subset(train), spec);
      path.emplace(*problem);
    } catch (const SolverError&) {
      std::fill(valid.begin(), valid.end(), false);
      break;
    }

    for (std::size_t g = 0; g < grid_size; ++g) {
      if (!valid[g]) continue;
      try {
        const SplineFit f = path->fit(cfg.grid[g]);
        for (Eigen::Index i : held_out) predictions(i, static_cast<Eigen::Index>(g)) = evaluate(f, ds.z(i));
      } catch (const SolverError&) {
        valid[g] = false;
      }
    }
  }

  CvResult result;
  result.fold_assignment = fold_assignment;
  result.curve.resize(grid_size);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid_size; ++g) {
    CvPoint& pt = result.curve[g];
    pt.lambda = cfg.grid[g];
    pt.valid = valid[g];
    if (!valid[g]) {
      pt.criterion = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    pt.criterion = mn_criterion(ds.y - predictions.col(static_cast<Eigen::Index>(g)), full_omega);
    if (!std::isfinite(pt.criterion)) {
      pt.valid = false;
      continue;
    }
    best = std::min(best, pt.criterion);
  }
  if (!std::isfinite(best)) throw SolverError(ErrorKind::selection, "cross-validation failed at every lambda");

  // Criteria within rounding of the minimum are ties; the smallest lambda wins.
  const double scale = mn_criterion(ds.y, full_omega);
  const double tie_tolerance = 1e-12 * scale + std::numeric_limits<double>::min();
  double lambda_star = std::numeric_limits<double>::infinity();
  for (const CvPoint& pt : result.curve) {
    if (pt.valid && pt.criterion <= best + tie_tolerance) lambda_star = std::min(lambda_star, pt.lambda);
  }
  result.lambda_star = lambda_star;
  return result;
}

}  // namespace ivspline
