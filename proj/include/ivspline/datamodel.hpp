#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ivspline {

/// A sample {(Y_i, Z_i, W_i)} with outcome y, endogenous regressor z and
/// instruments w (one row per observation, one column per instrument).
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  Eigen::MatrixXd w;

  /// Validating constructor: equal row counts, n >= 3, finite entries.
  static Dataset create(Eigen::VectorXd y, Eigen::VectorXd z, Eigen::MatrixXd w);

  Eigen::Index size() const { return y.size(); }
  Eigen::Index instruments() const { return w.cols(); }

  /// Rows selected by index, in the given order. Does not enforce n >= 3.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;

  /// Same data with the outcome replaced.
  Dataset with_outcome(Eigen::VectorXd new_y) const;

  /// Pairs (i, j), i < j, whose instrument rows are identical.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> duplicate_instrument_rows() const;
};

struct ColumnMap {
  std::string y = "y";
  std::string z = "z";
  std::vector<std::string> w = {"w"};
};

Dataset load_csv(const std::string& path, const ColumnMap& columns);

/// Writes y, z and the instrument columns with 17 significant digits.
void write_csv(const Dataset& ds, const std::string& path, const ColumnMap& columns);

struct StandardizedInstruments {
  Eigen::MatrixXd w_std;
  Eigen::VectorXd scales;
  Eigen::VectorXd centers;

  Eigen::MatrixXd restore() const;
};

/// Columnwise (w - mean) / sd with the n-1 divisor. Throws on constant columns.
StandardizedInstruments standardize_instruments(const Eigen::MatrixXd& w);

}  // namespace ivspline
