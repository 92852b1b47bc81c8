#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fqa/curve_matrix.hpp"
#include "fqa/fqa.hpp"

namespace fqa {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile, accurate to better than 1e-9 on (0,1).
double normal_quantile(double prob);

// Per-cell indicator summand series.  Column c holds, for t = 1..T-l,
//   (X_t - p)(Y_{t+l} - q) / sqrt(p(1-p) q(1-q)),
// where X and Y are the excursion-size indicators of the cell's two
// (level, threshold) pairs and p, q their full-sample means.  Only
// non-degenerate cells get a column, in grid order.
struct SummandMatrix {
  Eigen::MatrixXd rows;             // (T - lag) x d
  std::vector<Eigen::Index> cells;  // grid cell position of each column
  FqaGrid grid;
  Eigen::Index lag = 0;
  Eigen::Index source_T = 0;

  Eigen::Index count() const { return rows.rows(); }
  Eigen::Index cell_count() const { return rows.cols(); }
};

SummandMatrix indicator_summands(const ExcursionTable& table,
                                 const FqaGrid& grid, Eigen::Index lag);

// Lag-window long-run covariance of the summand columns:
//   Omega = G_0 + sum_{r=1..h} w(r) (G_r + G_r'),
// where G_r is the lag-r sample autocovariance of the mean-centered rows
// (divisor = full row count) and w(r) = 1 - r/(h+1) are Bartlett weights.
// The result is projected onto the PSD cone by clamping negative
// eigenvalues to zero.  Requires at least 10 rows.
Eigen::MatrixXd estimate_omega(const SummandMatrix& s, Eigen::Index bandwidth);

// Full spectrum of a symmetric PSD matrix: negatives clamped to zero,
// returned in descending order.  Rejects inputs that are not symmetric
// within an absolute tolerance of 1e-10 (scaled by the largest entry).
Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& omega);

// M draws of Q = sum_j lambda_j Y_j^2 with iid standard normal Y_j, sorted
// ascending.  Draws are generated in fixed-size chunks with seeds derived
// from (seed, chunk index), so the sample is bit-reproducible and
// independent of any parallel partitioning.  Components with
// lambda_j <= 1e-12 * max(lambda) are skipped; at double precision they
// cannot move the sum.
std::vector<double> mc_null_sample(const Eigen::VectorXd& lambdas,
                                   Eigen::Index M, std::uint64_t seed);

// (1 + #{Q_m >= stat}) / (M + 1): the finite-sample Monte Carlo p-value.
double mc_p_value(const std::vector<double>& sorted_null, double stat);

// Critical value c such that `stat > c` holds exactly when
// mc_p_value(stat) < alpha + 1.5/(M+1): the order statistic Q_(M-j) with
// j = ceil(alpha (M+1) + 1/2) - 1.
double mc_critical_value(const std::vector<double>& sorted_null, double alpha);

// Everything the Monte Carlo null calibration depends on.
struct NullSpec {
  Eigen::VectorXd eigenvalues;  // descending, >= 0
  Eigen::Index M = 10000;
  std::uint64_t seed = 0;
  Eigen::Index bandwidth = 0;
};

struct TestResult {
  double statistic = 0.0;  // T * sum of squared cell correlations
  Eigen::Index lag = 0;
  double p_value = 1.0;
  std::vector<std::pair<double, double>> critical_values;  // (alpha, c)
  Eigen::Index masked_cells = 0;
  NullSpec null_spec;
  double runtime_seconds = 0.0;
};

// JSON object with fields statistic, lag, p_value, critical_values,
// eigenvalue_count, masked_cells, seed, M, bandwidth, runtime_seconds.
// Pass include_runtime = false to get a byte-stable serialization for
// reproducibility comparisons (wall-clock time is the one field two
// identical runs legitimately disagree on).
std::string test_result_to_json(const TestResult& r,
                                bool include_runtime = true);

// JSON object with the cell values, degeneracy mask, grid, and lag of a
// stacked correlation vector.
std::string fqa_vector_to_json(const FqaVector& v);

// Default lag-window bandwidth: floor(T^(1/3)).
Eigen::Index auto_bandwidth(Eigen::Index T);

// Full omnibus white-noise test at one lag: quantile curves -> excursion
// table -> cell correlations -> T * sum of squares, calibrated against the
// weighted-chi-square Monte Carlo null built from the lag-window covariance
// of the indicator summands.  `bandwidth` empty means auto_bandwidth(T).
// Requires M >= 1000.  Throws when every grid cell is degenerate.
TestResult omnibus_test(const CurveMatrix& m, Eigen::Index lag,
                        const FqaGrid& grid, const std::vector<double>& alphas,
                        Eigen::Index M, std::uint64_t seed,
                        std::optional<Eigen::Index> bandwidth = std::nullopt);

// How the scale of the fixed-cell z statistic is estimated: the exact null
// value 1 of the standardized summand variance, or the sample standard
// deviation of the cell's summand series.
enum class SigmaMode { NullCalibrated, PlugIn };

struct FixedCellResult {
  FqaParams params;
  Eigen::Index T = 0;
  double rho = 0.0;
  double sigma = 1.0;
  double z = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  double ci_low = 0.0;
  double ci_high = 0.0;
  SigmaMode sigma_mode = SigmaMode::NullCalibrated;
};

// Asymptotic z-test of a single correlation cell: z = sqrt(T) rho / sigma,
// two-sided normal p-value, and the confidence interval
// rho -+ (sigma/sqrt(T)) z_{1-alpha/2}.  Throws DegenerateCellError when the
// cell's marginals are 0 or 1 (or, in plug-in mode, when the summand series
// has zero variance).
FixedCellResult fixed_cell_test(const CurveMatrix& m, const FqaParams& params,
                                double alpha,
                                SigmaMode mode = SigmaMode::NullCalibrated);

}  // namespace fqa
