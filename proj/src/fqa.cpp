#include "fqa/fqa.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fqa {

namespace {

void check_probability(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    std::ostringstream msg;
    msg << name << " = " << x << " must lie strictly inside (0,1)";
    throw std::invalid_argument(msg.str());
  }
}

Eigen::Index find_level(const std::vector<double>& levels, double value,
                        const char* what) {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (std::abs(levels[i] - value) <= 1e-12)
      return static_cast<Eigen::Index>(i);
  std::ostringstream msg;
  msg << what << " = " << value << " is not one of the table's levels";
  throw std::invalid_argument(msg.str());
}

}  // namespace

FqaGrid FqaGrid::reduced_default() {
  return make_reduced(level_range(0.05, 0.95, 0.05));
}

FqaGrid FqaGrid::make_reduced(std::vector<double> levels) {
  validate_levels(levels);
  FqaGrid g;
  g.levels = levels;
  g.thresholds = std::move(levels);
  g.reduced = true;
  return g;
}

FqaGrid FqaGrid::make_general(std::vector<double> levels,
                              std::vector<double> thresholds) {
  validate_levels(levels);
  validate_levels(thresholds);
  FqaGrid g;
  g.levels = std::move(levels);
  g.thresholds = std::move(thresholds);
  g.reduced = false;
  return g;
}

Eigen::Index FqaGrid::cell_count() const {
  const Eigen::Index P = level_count();
  const Eigen::Index B = threshold_count();
  return reduced ? P * P : P * P * B * B;
}

FqaGrid::Cell FqaGrid::cell(Eigen::Index pos) const {
  if (pos < 0 || pos >= cell_count())
    throw std::invalid_argument("FqaGrid::cell: position out of range");
  const Eigen::Index P = level_count();
  const Eigen::Index B = threshold_count();
  Cell c{};
  if (reduced) {
    c.i = pos / P;
    c.j = pos % P;
    c.k = c.i;
    c.l = c.j;
  } else {
    c.l = pos % B;
    pos /= B;
    c.k = pos % B;
    pos /= B;
    c.j = pos % P;
    c.i = pos / P;
  }
  return c;
}

Eigen::Index FqaGrid::cell_pos(Eigen::Index i, Eigen::Index j) const {
  if (!reduced)
    throw std::invalid_argument(
        "FqaGrid::cell_pos(i,j): grid is in general mode; pass (i,j,k,l)");
  const Eigen::Index P = level_count();
  if (i < 0 || i >= P || j < 0 || j >= P)
    throw std::invalid_argument("FqaGrid::cell_pos: index out of range");
  return i * P + j;
}

Eigen::Index FqaGrid::cell_pos(Eigen::Index i, Eigen::Index j, Eigen::Index k,
                               Eigen::Index l) const {
  const Eigen::Index P = level_count();
  const Eigen::Index B = threshold_count();
  if (i < 0 || i >= P || j < 0 || j >= P || k < 0 || k >= B || l < 0 || l >= B)
    throw std::invalid_argument("FqaGrid::cell_pos: index out of range");
  if (reduced) {
    if (k != i || l != j)
      throw std::invalid_argument(
          "FqaGrid::cell_pos: reduced grids only enumerate cells with "
          "thresholds equal to levels");
    return i * P + j;
  }
  return ((i * P + j) * B + k) * B + l;
}

FqaParams FqaGrid::cell_params(Eigen::Index pos, Eigen::Index lag) const {
  const Cell c = cell(pos);
  FqaParams params;
  params.tau = levels[static_cast<std::size_t>(c.i)];
  params.tau_prime = levels[static_cast<std::size_t>(c.j)];
  params.beta = thresholds[static_cast<std::size_t>(c.k)];
  params.beta_prime = thresholds[static_cast<std::size_t>(c.l)];
  params.lag = lag;
  return params;
}

Eigen::Index FqaVector::masked_count() const {
  Eigen::Index n = 0;
  for (const auto m : mask)
    if (m) ++n;
  return n;
}

double marginal_prob(const Eigen::Ref<const Eigen::VectorXd>& fractions,
                     double beta) {
  const Eigen::Index T = fractions.size();
  if (T < 1) throw std::invalid_argument("marginal_prob: empty column");
  Eigen::Index count = 0;
  for (Eigen::Index t = 0; t < T; ++t)
    if (fractions[t] <= beta) ++count;
  return static_cast<double>(count) / static_cast<double>(T);
}

double joint_prob(const Eigen::Ref<const Eigen::VectorXd>& frac_tau,
                  const Eigen::Ref<const Eigen::VectorXd>& frac_tau_prime,
                  Eigen::Index lag, double beta, double beta_prime) {
  const Eigen::Index T = frac_tau.size();
  if (frac_tau_prime.size() != T)
    throw std::invalid_argument("joint_prob: column length mismatch");
  if (lag < 1 || lag > T - 1) {
    std::ostringstream msg;
    msg << "joint_prob: lag " << lag << " out of range [1, " << T - 1 << "]";
    throw std::invalid_argument(msg.str());
  }
  Eigen::Index count = 0;
  for (Eigen::Index t = 0; t + lag < T; ++t)
    if (frac_tau[t] <= beta && frac_tau_prime[t + lag] <= beta_prime) ++count;
  // The divisor is the full series length T, not the number of summands T-l.
  return static_cast<double>(count) / static_cast<double>(T);
}

double fqa_hat(const ExcursionTable& table, const FqaParams& params) {
  check_probability(params.tau, "tau");
  check_probability(params.tau_prime, "tau_prime");
  check_probability(params.beta, "beta");
  check_probability(params.beta_prime, "beta_prime");
  const Eigen::Index T = table.fractions.rows();
  if (params.lag < 1 || params.lag > T - 2) {
    std::ostringstream msg;
    msg << "fqa_hat: lag " << params.lag << " out of range [1, " << T - 2
        << "] for series length " << T;
    throw std::invalid_argument(msg.str());
  }
  const Eigen::Index ci = find_level(table.levels, params.tau, "tau");
  const Eigen::Index cj = find_level(table.levels, params.tau_prime, "tau_prime");

  const double phat = marginal_prob(table.fractions.col(ci), params.beta);
  const double qhat = marginal_prob(table.fractions.col(cj), params.beta_prime);
  if (phat == 0.0 || phat == 1.0 || qhat == 0.0 || qhat == 1.0) {
    std::ostringstream msg;
    msg << "degenerate cell: marginal probabilities (" << phat << ", " << qhat
        << ") at (tau=" << params.tau << ", tau'=" << params.tau_prime
        << ", beta=" << params.beta << ", beta'=" << params.beta_prime
        << ", lag=" << params.lag << ") zero the correlation denominator";
    throw DegenerateCellError(msg.str());
  }
  const double joint =
      joint_prob(table.fractions.col(ci), table.fractions.col(cj), params.lag,
                 params.beta, params.beta_prime);
  return detail::fqa_from_probs(joint, phat, qhat);
}

namespace detail {

IndicatorSet build_indicators(const ExcursionTable& table, const FqaGrid& grid) {
  const Eigen::Index T = table.fractions.rows();
  const Eigen::Index P = grid.level_count();
  const Eigen::Index B = grid.threshold_count();

  // Map grid levels onto table columns.
  std::vector<Eigen::Index> level_col(static_cast<std::size_t>(P));
  for (Eigen::Index i = 0; i < P; ++i)
    level_col[static_cast<std::size_t>(i)] =
        find_level(table.levels, grid.levels[static_cast<std::size_t>(i)],
                   "grid level");

  // One indicator column per (level, threshold) combination actually used;
  // reduced mode pairs level i with threshold i only.
  IndicatorSet out;
  out.columns.resize(T, grid.reduced ? P : P * B);
  if (grid.reduced) {
    for (Eigen::Index i = 0; i < P; ++i) {
      const double beta = grid.thresholds[static_cast<std::size_t>(i)];
      const auto col = table.fractions.col(level_col[static_cast<std::size_t>(i)]);
      for (Eigen::Index t = 0; t < T; ++t)
        out.columns(t, i) = col[t] <= beta ? 1.0 : 0.0;
    }
  } else {
    for (Eigen::Index i = 0; i < P; ++i) {
      const auto col = table.fractions.col(level_col[static_cast<std::size_t>(i)]);
      for (Eigen::Index k = 0; k < B; ++k) {
        const double beta = grid.thresholds[static_cast<std::size_t>(k)];
        const Eigen::Index c = i * B + k;
        for (Eigen::Index t = 0; t < T; ++t)
          out.columns(t, c) = col[t] <= beta ? 1.0 : 0.0;
      }
    }
  }
  out.counts = out.columns.colwise().sum();
  return out;
}

std::pair<Eigen::Index, Eigen::Index> cell_columns(const FqaGrid& grid,
                                                   Eigen::Index pos) {
  const FqaGrid::Cell c = grid.cell(pos);
  if (grid.reduced) return {c.i, c.j};
  const Eigen::Index B = grid.threshold_count();
  return {c.i * B + c.k, c.j * B + c.l};
}

}  // namespace detail

FqaVector fqa_vector(const ExcursionTable& table, const FqaGrid& grid,
                     Eigen::Index lag) {
  const Eigen::Index T = table.fractions.rows();
  if (lag < 1 || lag > T - 2) {
    std::ostringstream msg;
    msg << "fqa_vector: lag " << lag << " out of range [1, " << T - 2
        << "] for series length " << T;
    throw std::invalid_argument(msg.str());
  }
  const Eigen::Index P = grid.level_count();
  const Eigen::Index B = grid.threshold_count();
  const detail::IndicatorSet ind = detail::build_indicators(table, grid);
  const Eigen::MatrixXd& X = ind.columns;

  // All pairwise joint counts in one product of 0/1 matrices; every entry is
  // an exact small integer, so this is bitwise equal to a scalar loop.
  const Eigen::Index n = T - lag;
  const Eigen::MatrixXd pair_counts =
      X.topRows(n).transpose() * X.bottomRows(n);
  const Eigen::VectorXd& marg_counts = ind.counts;

  const double Td = static_cast<double>(T);
  FqaVector out;
  out.grid = grid;
  out.lag = lag;
  out.source_T = T;
  out.values = Eigen::VectorXd::Zero(grid.cell_count());
  out.mask.assign(static_cast<std::size_t>(grid.cell_count()), 0);

  auto eval_cell = [&](Eigen::Index pos, Eigen::Index col_a, Eigen::Index col_b) {
    const double count_a = marg_counts[col_a];
    const double count_b = marg_counts[col_b];
    if (count_a == 0.0 || count_a == Td || count_b == 0.0 || count_b == Td) {
      out.mask[static_cast<std::size_t>(pos)] = 1;
      return;
    }
    const double phat = count_a / Td;
    const double qhat = count_b / Td;
    const double joint = pair_counts(col_a, col_b) / Td;
    out.values[pos] = detail::fqa_from_probs(joint, phat, qhat);
  };

  if (grid.reduced) {
    for (Eigen::Index i = 0; i < P; ++i)
      for (Eigen::Index j = 0; j < P; ++j) eval_cell(i * P + j, i, j);
  } else {
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < P; ++i)
      for (Eigen::Index j = 0; j < P; ++j)
        for (Eigen::Index k = 0; k < B; ++k)
          for (Eigen::Index l = 0; l < B; ++l, ++pos)
            eval_cell(pos, i * B + k, j * B + l);
  }
  return out;
}

double omnibus_stat(const FqaVector& v) {
  if (v.unmasked_count() == 0)
    throw std::invalid_argument(
        "omnibus_stat: all cells are degenerate; no statistic is defined");
  double s = 0.0;
  for (Eigen::Index c = 0; c < v.size(); ++c)
    if (!v.mask[static_cast<std::size_t>(c)]) s += v.values[c] * v.values[c];
  return s;
}

double scaled_omnibus_stat(const FqaVector& v, Eigen::Index T) {
  if (T < 1) throw std::invalid_argument("scaled_omnibus_stat: T must be >= 1");
  return static_cast<double>(T) * omnibus_stat(v);
}

}  // namespace fqa
