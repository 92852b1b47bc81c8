#include "fqa/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fqa {

double ecdf_at(const Eigen::Ref<const Eigen::VectorXd>& sample, double x) {
  const Eigen::Index T = sample.size();
  if (T < 1) throw std::invalid_argument("ecdf_at: empty sample");
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < T; ++i)
    if (sample[i] <= x) ++count;
  return static_cast<double>(count) / static_cast<double>(T);
}

const std::vector<double>& validate_levels(const std::vector<double>& levels) {
  if (levels.empty())
    throw std::invalid_argument("levels: need at least one probability level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      std::ostringstream msg;
      msg << "levels: entry " << i + 1 << " = " << levels[i]
          << " is outside the open interval (0,1)";
      throw std::invalid_argument(msg.str());
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      std::ostringstream msg;
      msg << "levels: entries must be strictly ascending (entry " << i + 1
          << " = " << levels[i] << " does not exceed entry " << i << " = "
          << levels[i - 1] << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  return levels;
}

std::vector<double> level_range(double first, double last, double step) {
  if (!(step > 0.0))
    throw std::invalid_argument("level_range: step must be positive");
  if (last < first)
    throw std::invalid_argument("level_range: last must be >= first");
  const auto count =
      static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = first + static_cast<double>(i) * step;
  return out;
}

Eigen::Index quantile_rank(double tau, Eigen::Index T) {
  auto k = static_cast<Eigen::Index>(
      std::ceil(tau * static_cast<double>(T) - 1e-9));
  if (k < 1) k = 1;
  if (k > T) k = T;
  return k - 1;  // 0-based
}

QuantileCurveSet quantile_curves(const CurveMatrix& m,
                                 const std::vector<double>& levels) {
  validate_levels(levels);
  const Eigen::Index T = m.series_length();
  const Eigen::Index p = m.grid_size();
  if (T < 1 || p < 1)
    throw std::invalid_argument("quantile_curves: empty series matrix");
  const auto P = static_cast<Eigen::Index>(levels.size());

  QuantileCurveSet out;
  out.levels = levels;
  out.curves.resize(P, p);

  std::vector<double> column(static_cast<std::size_t>(T));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index t = 0; t < T; ++t)
      column[static_cast<std::size_t>(t)] = m.values(t, j);
    std::sort(column.begin(), column.end());
    for (Eigen::Index i = 0; i < P; ++i)
      out.curves(i, j) =
          column[static_cast<std::size_t>(quantile_rank(levels[static_cast<std::size_t>(i)], T))];
  }
  return out;
}

double excursion_fraction(const Eigen::Ref<const Eigen::VectorXd>& curve,
                          const Eigen::Ref<const Eigen::VectorXd>& qcurve) {
  const Eigen::Index p = curve.size();
  if (p != qcurve.size())
    throw std::invalid_argument("excursion_fraction: length mismatch");
  if (p < 1) throw std::invalid_argument("excursion_fraction: empty curves");
  Eigen::Index count = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    if (curve[j] <= qcurve[j]) ++count;
  return static_cast<double>(count) / static_cast<double>(p);
}

ExcursionTable excursion_table(const CurveMatrix& m, const QuantileCurveSet& q) {
  const Eigen::Index T = m.series_length();
  const Eigen::Index p = m.grid_size();
  const Eigen::Index P = q.level_count();
  if (T < 1 || p < 1)
    throw std::invalid_argument("excursion_table: empty series matrix");
  if (q.grid_size() != p) {
    std::ostringstream msg;
    msg << "excursion_table: grid-size mismatch (series has p = " << p
        << ", quantile curves have p = " << q.grid_size() << ")";
    throw std::invalid_argument(msg.str());
  }

  // Count grid points below each quantile curve with a column-outer loop so
  // the column-major series matrix is walked contiguously.
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(T, P);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < P; ++i) {
      const double threshold = q.curves(i, j);
      for (Eigen::Index t = 0; t < T; ++t)
        if (m.values(t, j) <= threshold) ++counts(t, i);
    }

  ExcursionTable out;
  out.levels = q.levels;
  out.source_T = T;
  out.source_p = p;
  out.fractions = counts.cast<double>() / static_cast<double>(p);
  return out;
}

}  // namespace fqa
