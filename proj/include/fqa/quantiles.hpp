#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fqa/curve_matrix.hpp"

namespace fqa {

// Pointwise empirical CDF: (1/T) * #{i : sample_i <= x}.
double ecdf_at(const Eigen::Ref<const Eigen::VectorXd>& sample, double x);

// Validates that `levels` is non-empty, strictly ascending, and inside (0,1).
// Returns the input untouched so calls can be chained.
const std::vector<double>& validate_levels(const std::vector<double>& levels);

// Evenly stepped probability levels {first, first + step, ..., last}.  Every
// caller that wants the same conceptual range must go through this function
// so the resulting doubles are bit-identical everywhere.
std::vector<double> level_range(double first, double last, double step);

// 0-based index of the ceil(tau*T)-th order statistic.  A 1e-9 slack is
// subtracted before taking the ceiling so that products like 0.15*200, which
// round to 30.000000000000004 in binary, still select rank 30 rather than 31.
Eigen::Index quantile_rank(double tau, Eigen::Index T);

// Per-grid-point empirical quantile curves at a set of probability levels.
struct QuantileCurveSet {
  std::vector<double> levels;  // ascending, each in (0,1)
  Eigen::MatrixXd curves;      // P x p; row i = curve for levels[i]

  Eigen::Index level_count() const { return curves.rows(); }
  Eigen::Index grid_size() const { return curves.cols(); }
};

// Exact generalized inverse of the pointwise ECDF: for each grid point j and
// level tau, the ceil(tau*T)-th order statistic of column j.  Order
// statistics are always observed values, so curves never interpolate, and for
// fixed j they are automatically non-decreasing across ascending levels.
QuantileCurveSet quantile_curves(const CurveMatrix& m,
                                 const std::vector<double>& levels);

// Fraction of grid points where `curve` lies at or below `qcurve`
// (inclusive comparison).
double excursion_fraction(const Eigen::Ref<const Eigen::VectorXd>& curve,
                          const Eigen::Ref<const Eigen::VectorXd>& qcurve);

// Excursion-set fractions of every curve in a series against every quantile
// curve: entry (t, i) = fraction of grid points where curve t lies at or
// below quantile curve i.  Entries are exact multiples of 1/p.
struct ExcursionTable {
  Eigen::MatrixXd fractions;   // T x P
  std::vector<double> levels;  // the P levels, ascending
  Eigen::Index source_T = 0;
  Eigen::Index source_p = 0;
};

ExcursionTable excursion_table(const CurveMatrix& m, const QuantileCurveSet& q);

}  // namespace fqa
