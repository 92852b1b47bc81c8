#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fqa/quantiles.hpp"

namespace fqa {

// Raised when a requested correlation cell has a marginal probability of
// exactly 0 or 1, which zeroes the denominator of the correlation ratio.
class DegenerateCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One (tau, tau', lag, beta, beta') evaluation point of the quantile
// autocorrelation.
struct FqaParams {
  double tau = 0.0;
  double tau_prime = 0.0;
  Eigen::Index lag = 1;
  double beta = 0.0;
  double beta_prime = 0.0;
};

// The evaluation grid of the omnibus statistic.  In reduced mode the
// thresholds are identified with the levels and only cells with
// (beta, beta') = (tau, tau') are enumerated, giving P^2 cells in
// lexicographic (i, j) order.  In general mode all P^2 B^2 combinations are
// enumerated in lexicographic (i, j, k, l) order.
struct FqaGrid {
  std::vector<double> levels;      // ascending, in (0,1); size P
  std::vector<double> thresholds;  // ascending, in (0,1); size B (== levels when reduced)
  bool reduced = true;

  // levels {0.05, 0.10, ..., 0.95} (P = 19), reduced mode.
  static FqaGrid reduced_default();
  static FqaGrid make_reduced(std::vector<double> levels);
  static FqaGrid make_general(std::vector<double> levels,
                              std::vector<double> thresholds);

  Eigen::Index level_count() const {
    return static_cast<Eigen::Index>(levels.size());
  }
  Eigen::Index threshold_count() const {
    return static_cast<Eigen::Index>(thresholds.size());
  }
  Eigen::Index cell_count() const;

  // Indices into `levels` (i, j) and `thresholds` (k, l) for one cell.
  // In reduced mode k == i and l == j.
  struct Cell {
    Eigen::Index i, j, k, l;
  };
  Cell cell(Eigen::Index pos) const;
  Eigen::Index cell_pos(Eigen::Index i, Eigen::Index j) const;  // reduced
  Eigen::Index cell_pos(Eigen::Index i, Eigen::Index j, Eigen::Index k,
                        Eigen::Index l) const;  // general
  FqaParams cell_params(Eigen::Index pos, Eigen::Index lag) const;
};

// Stacked correlation estimates over all grid cells at one lag.  Cells whose
// marginal probabilities hit 0 or 1 are flagged in `mask` (and their value
// slot holds 0); everything downstream skips them.
struct FqaVector {
  Eigen::VectorXd values;
  std::vector<std::uint8_t> mask;  // 1 = degenerate, excluded
  FqaGrid grid;
  Eigen::Index lag = 0;
  Eigen::Index source_T = 0;  // series length the table was built from

  Eigen::Index size() const { return values.size(); }
  Eigen::Index masked_count() const;
  Eigen::Index unmasked_count() const { return size() - masked_count(); }
};

// (1/T) * #{t : fractions_t <= beta}.
double marginal_prob(const Eigen::Ref<const Eigen::VectorXd>& fractions,
                     double beta);

// (1/T) * sum_{t=1..T-l} 1{frac_tau_t <= beta} * 1{frac_tau_prime_{t+l} <= beta'}.
// The divisor is T even though the sum has T-l terms.
double joint_prob(const Eigen::Ref<const Eigen::VectorXd>& frac_tau,
                  const Eigen::Ref<const Eigen::VectorXd>& frac_tau_prime,
                  Eigen::Index lag, double beta, double beta_prime);

// Correlation of the lag-separated excursion-size indicator pair:
//   rho = (joint - p*q) / sqrt(p(1-p) q(1-q)),
// computed from the excursion table at the requested levels.  Throws
// DegenerateCellError when p or q is exactly 0 or 1.  The result is clamped
// to [-1, 1]; the clamp normally absorbs only floating-point rounding of
// order 1e-12, though in very short series (T close to the lag) the raw
// ratio can genuinely exit the interval because the joint sum over T-l pairs
// is divided by T.
double fqa_hat(const ExcursionTable& table, const FqaParams& params);

// Evaluates the correlation on every grid cell at one lag, in the grid's
// fixed lexicographic order.  Degenerate cells are masked instead of
// throwing.  Grid levels and thresholds must all appear among table.levels.
FqaVector fqa_vector(const ExcursionTable& table, const FqaGrid& grid,
                     Eigen::Index lag);

// Sum of squared unmasked cell values.  Throws std::invalid_argument when
// every cell is masked.
double omnibus_stat(const FqaVector& v);

// T times the sum of squares — the statistic handed to the null calibration.
double scaled_omnibus_stat(const FqaVector& v, Eigen::Index T);

namespace detail {
// Shared final arithmetic of the correlation so that per-cell and vectorized
// evaluation produce bitwise-identical values.
inline double fqa_from_probs(double joint, double phat, double qhat) {
  const double num = joint - phat * qhat;
  const double den = std::sqrt(phat * (1.0 - phat) * qhat * (1.0 - qhat));
  double rho = num / den;
  if (rho > 1.0) rho = 1.0;
  if (rho < -1.0) rho = -1.0;
  return rho;
}

// Excursion-size indicator columns, one per (level, threshold) pair the grid
// uses (P columns in reduced mode, P*B in general mode), plus per-column
// counts of ones.  Shared by the correlation vector and the summand-series
// construction so both see bitwise-identical marginals.
struct IndicatorSet {
  Eigen::MatrixXd columns;  // T x (P or P*B), entries exactly 0.0 or 1.0
  Eigen::VectorXd counts;   // column sums (exact integers)
};
IndicatorSet build_indicators(const ExcursionTable& table, const FqaGrid& grid);

// Indicator-column pair consumed by grid cell `pos`.
std::pair<Eigen::Index, Eigen::Index> cell_columns(const FqaGrid& grid,
                                                   Eigen::Index pos);
}  // namespace detail

}  // namespace fqa
