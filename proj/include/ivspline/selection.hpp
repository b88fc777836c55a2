#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ivspline/datamodel.hpp"
#include "ivspline/kernel.hpp"

namespace ivspline {

/// lambda = p / (1 - p) for 400 equispaced p from 1e-5 to 0.7.
std::vector<double> default_grid();

struct CvConfig {
  int folds = 2;
  std::vector<double> grid = default_grid();
  std::uint64_t seed = 0;

  void validate() const;
  bool paper_faithful() const { return folds == 2; }
};

struct CvPoint {
  double lambda = 0.0;
  double criterion = 0.0;
  bool valid = true;
};

struct CvResult {
  double lambda_star = 0.0;
  std::vector<CvPoint> curve;
  std::vector<int> fold_assignment;
  // The criterion always weights residuals with the full-sample Omega.
  std::string criterion_weights = "full-sample";
};

/// Fold id per row from a seeded permutation; the first ceil(n/k)-ish block of
/// the permutation goes to fold 0, and so on.
std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed);

/// K-fold CV of lambda. Each fold's estimator is fitted on the rows outside the
/// fold (with that subsample's own Omega) and predicts the rows inside it;
/// the out-of-fold predictions are scored by M_n with the full-sample Omega.
CvResult cross_validate(const Dataset& ds, const KernelSpec& spec, const CvConfig& cfg);

/// Same, with a caller-provided fold assignment.
CvResult cross_validate(const Dataset& ds, const KernelSpec& spec, const CvConfig& cfg,
                        const std::vector<int>& fold_assignment);

}  // namespace ivspline
