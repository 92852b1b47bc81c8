#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

namespace fqa {

/// A densely observed functional time series: row t is the curve at time t,
/// sampled on grid_size() evenly spaced points u_j = j/(p-1) in [0,1].
///
/// The struct itself does not enforce invariants; validate() does, and
/// load_csv() validates on ingestion. Instances are treated as immutable
/// after construction and are safe for concurrent reads.
struct CurveMatrix {
  Eigen::MatrixXd values;  // T x p

  Eigen::Index series_length() const { return values.rows(); }  // T
  Eigen::Index grid_size() const { return values.cols(); }      // p
};

/// Evenly spaced evaluation grid on [0,1] with fixed endpoints.
struct EvalGrid {
  std::vector<double> points;

  /// The canonical grid u_j = j/(p-1), j = 0..p-1.
  static EvalGrid uniform(Eigen::Index p);

  /// Validates: first point 0, last point 1, even spacing to 1e-12
  /// relative tolerance. Throws std::invalid_argument otherwise.
  static EvalGrid from_points(std::vector<double> points);
};

/// Reads a comma-separated file, one curve per row. Throws
/// std::invalid_argument on ragged rows, non-numeric or non-finite cells
/// (naming the 1-based row/column), or a matrix smaller than 2x2, and
/// std::runtime_error on IO failure.
CurveMatrix load_csv(const std::filesystem::path& path, bool has_header = false);

/// Writes the matrix in the format load_csv reads. Values are written with
/// shortest round-trip precision, so save followed by load is exact.
void save_csv(const CurveMatrix& m, const std::filesystem::path& path);

/// Intraday log-return transform: entry (t,j) = ln m(t,j+1) - ln m(t,j).
/// Output has the same number of rows and one fewer column, re-indexed onto
/// the evenly spaced grid of p-1 points on [0,1]. Throws on non-positive
/// prices or p < 2.
CurveMatrix log_returns(const CurveMatrix& prices);

/// Checks all CurveMatrix invariants (T >= 2, p >= 2, all entries finite)
/// and returns the input unchanged. Throws std::invalid_argument listing
/// the violations with 1-based indices.
const CurveMatrix& validate(const CurveMatrix& m);

}  // namespace fqa
