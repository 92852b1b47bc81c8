#include "fqa/inference.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fqa/rng.hpp"

namespace fqa {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("normal_quantile: probability must be in (0,1)");

  // Rational approximation (relative error < 1.15e-9), then one Halley step
  // against the exact CDF, which pushes the error to the last few ulps.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};

  const double p_low = 0.02425;
  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = normal_cdf(x) - prob;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

SummandMatrix indicator_summands(const ExcursionTable& table,
                                 const FqaGrid& grid, Eigen::Index lag) {
  const Eigen::Index T = table.fractions.rows();
  if (lag < 1 || lag > T - 2) {
    std::ostringstream msg;
    msg << "indicator_summands: lag " << lag << " out of range [1, " << T - 2
        << "] for series length " << T;
    throw std::invalid_argument(msg.str());
  }
  const detail::IndicatorSet ind = detail::build_indicators(table, grid);
  const Eigen::Index n = T - lag;
  const double Td = static_cast<double>(T);

  std::vector<Eigen::Index> kept;
  for (Eigen::Index pos = 0; pos < grid.cell_count(); ++pos) {
    const auto [a, b] = detail::cell_columns(grid, pos);
    const double ca = ind.counts[a];
    const double cb = ind.counts[b];
    if (ca == 0.0 || ca == Td || cb == 0.0 || cb == Td) continue;
    kept.push_back(pos);
  }

  SummandMatrix out;
  out.grid = grid;
  out.lag = lag;
  out.source_T = T;
  out.cells = kept;
  out.rows.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const auto [a, b] = detail::cell_columns(grid, kept[c]);
    const double phat = ind.counts[a] / Td;
    const double qhat = ind.counts[b] / Td;
    const double den = std::sqrt(phat * (1.0 - phat) * qhat * (1.0 - qhat));
    out.rows.col(static_cast<Eigen::Index>(c)) =
        ((ind.columns.col(a).head(n).array() - phat) *
         (ind.columns.col(b).tail(n).array() - qhat)) /
        den;
  }
  return out;
}

namespace {

// Lag-window covariance before PSD projection:
//   G_0 + sum_{r=1..h} (1 - r/(h+1)) (G_r + G_r'),
// with G_r the lag-r autocovariance of the mean-centered rows, divisor n.
Eigen::MatrixXd lag_window_cov(const Eigen::MatrixXd& rows,
                               Eigen::Index bandwidth) {
  const Eigen::Index n = rows.rows();
  Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  Eigen::MatrixXd omega =
      (centered.transpose() * centered) / static_cast<double>(n);
  const Eigen::Index h = std::min<Eigen::Index>(bandwidth, n - 1);
  for (Eigen::Index r = 1; r <= h; ++r) {
    const Eigen::MatrixXd g = (centered.topRows(n - r).transpose() *
                               centered.bottomRows(n - r)) /
                              static_cast<double>(n);
    const double w =
        1.0 - static_cast<double>(r) / (static_cast<double>(h) + 1.0);
    omega.noalias() += w * (g + g.transpose());
  }
  // Kill the asymmetry left by separate g / g' accumulation order.
  omega = ((omega + omega.transpose()) * 0.5).eval();
  return omega;
}

Eigen::VectorXd clamp_descending(Eigen::VectorXd vals) {
  std::sort(vals.data(), vals.data() + vals.size(), std::greater<double>());
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals[i] < 0.0) vals[i] = 0.0;
  return vals;
}

std::string shortest_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Eigen::MatrixXd estimate_omega(const SummandMatrix& s, Eigen::Index bandwidth) {
  if (bandwidth < 0)
    throw std::invalid_argument("estimate_omega: bandwidth must be >= 0");
  const Eigen::Index n = s.count();
  if (n < 10)
    throw std::invalid_argument(
        "estimate_omega: need at least 10 summand rows");
  const Eigen::Index d = s.cell_count();
  if (d == 0) return Eigen::MatrixXd(0, 0);

  Eigen::MatrixXd omega = lag_window_cov(s.rows, bandwidth);

  // PSD projection: clamp negative eigenvalues, keep eigenvectors.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("estimate_omega: eigendecomposition failed");
  Eigen::VectorXd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals[i] < 0.0) vals[i] = 0.0;
  omega =
      es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
  return ((omega + omega.transpose()) * 0.5).eval();
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& omega) {
  if (omega.rows() != omega.cols())
    throw std::invalid_argument("eigenvalues: matrix must be square");
  if (omega.size() == 0) return Eigen::VectorXd(0);
  const double scale = std::max(1.0, omega.cwiseAbs().maxCoeff());
  const double asym = (omega - omega.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw std::invalid_argument("eigenvalues: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalues: eigendecomposition failed");
  return clamp_descending(es.eigenvalues());
}

std::vector<double> mc_null_sample(const Eigen::VectorXd& lambdas,
                                   Eigen::Index M, std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("mc_null_sample: M must be >= 1");
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
    if (lambdas[j] < 0.0)
      throw std::invalid_argument(
          "mc_null_sample: eigenvalues must be nonnegative");
    lmax = std::max(lmax, lambdas[j]);
  }
  std::vector<double> active;
  active.reserve(static_cast<std::size_t>(lambdas.size()));
  for (Eigen::Index j = 0; j < lambdas.size(); ++j)
    if (lambdas[j] > 1e-12 * lmax) active.push_back(lambdas[j]);

  std::vector<double> sample(static_cast<std::size_t>(M), 0.0);
  if (!active.empty()) {
    // Fixed-size chunks with independently derived seeds: draw m depends
    // only on (seed, m), never on how chunks are assigned to workers.
    constexpr Eigen::Index kChunk = 1024;
    const Eigen::Index nchunks = (M + kChunk - 1) / kChunk;
    for (Eigen::Index g = 0; g < nchunks; ++g) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
      const Eigen::Index hi = std::min(M, (g + 1) * kChunk);
      for (Eigen::Index m = g * kChunk; m < hi; ++m) {
        double acc = 0.0;
        for (const double lam : active) {
          const double z = rng.normal();
          acc += lam * z * z;
        }
        sample[static_cast<std::size_t>(m)] = acc;
      }
    }
  }
  std::sort(sample.begin(), sample.end());
  return sample;
}

double mc_p_value(const std::vector<double>& sorted_null, double stat) {
  if (sorted_null.empty())
    throw std::invalid_argument("mc_p_value: empty null sample");
  const auto M = static_cast<double>(sorted_null.size());
  const auto geq = static_cast<double>(
      sorted_null.end() -
      std::lower_bound(sorted_null.begin(), sorted_null.end(), stat));
  return (1.0 + geq) / (M + 1.0);
}

double mc_critical_value(const std::vector<double>& sorted_null, double alpha) {
  if (sorted_null.empty())
    throw std::invalid_argument("mc_critical_value: empty null sample");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("mc_critical_value: alpha must be in (0,1)");
  const auto M = static_cast<Eigen::Index>(sorted_null.size());
  // c = Q_(M-j) with j = ceil(alpha (M+1) + 1/2) - 1 makes the decision
  // "stat > c" agree exactly with "p < alpha + 1.5/(M+1)".
  auto j = static_cast<Eigen::Index>(
      std::ceil(alpha * static_cast<double>(M + 1) + 0.5 - 1e-9) - 1.0);
  if (j < 0) j = 0;
  if (j > M - 1) j = M - 1;
  return sorted_null[static_cast<std::size_t>(M - 1 - j)];
}

Eigen::Index auto_bandwidth(Eigen::Index T) {
  if (T < 1) throw std::invalid_argument("auto_bandwidth: T must be >= 1");
  return static_cast<Eigen::Index>(
      std::floor(std::cbrt(static_cast<double>(T)) + 1e-9));
}

TestResult omnibus_test(const CurveMatrix& m, Eigen::Index lag,
                        const FqaGrid& grid, const std::vector<double>& alphas,
                        Eigen::Index M, std::uint64_t seed,
                        std::optional<Eigen::Index> bandwidth) {
  validate(m);
  const Eigen::Index T = m.series_length();
  if (lag < 1 || lag > T - 2) {
    std::ostringstream msg;
    msg << "omnibus_test: lag " << lag << " out of range [1, " << T - 2
        << "] for series length " << T;
    throw std::invalid_argument(msg.str());
  }
  if (T - lag < 10)
    throw std::invalid_argument(
        "omnibus_test: series too short for covariance estimation "
        "(need T - lag >= 10)");
  if (M < 1000)
    throw std::invalid_argument("omnibus_test: M must be >= 1000");
  if (alphas.empty())
    throw std::invalid_argument("omnibus_test: need at least one alpha");
  for (const double a : alphas)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("omnibus_test: alpha must be in (0,1)");
  const Eigen::Index h = bandwidth ? *bandwidth : auto_bandwidth(T);
  if (h < 0)
    throw std::invalid_argument("omnibus_test: bandwidth must be >= 0");

  const auto t0 = std::chrono::steady_clock::now();

  const QuantileCurveSet qs = quantile_curves(m, grid.levels);
  const ExcursionTable table = excursion_table(m, qs);
  const FqaVector v = fqa_vector(table, grid, lag);
  if (v.unmasked_count() == 0)
    throw std::invalid_argument(
        "omnibus_test: every grid cell is degenerate; the statistic is "
        "undefined (is the input constant?)");
  const double stat = scaled_omnibus_stat(v, T);

  const SummandMatrix sm = indicator_summands(table, grid, lag);
  // The sampler only needs the spectrum, so skip the PSD reconstruction:
  // clamped eigenvalues of the raw matrix equal the eigenvalues of the
  // projected matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      lag_window_cov(sm.rows, std::min<Eigen::Index>(h, sm.count() - 1)),
      Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("omnibus_test: eigendecomposition failed");
  const Eigen::VectorXd lambdas = clamp_descending(es.eigenvalues());

  const std::vector<double> null_sample = mc_null_sample(lambdas, M, seed);

  TestResult r;
  r.statistic = stat;
  r.lag = lag;
  r.p_value = mc_p_value(null_sample, stat);
  r.critical_values.reserve(alphas.size());
  for (const double a : alphas)
    r.critical_values.emplace_back(a, mc_critical_value(null_sample, a));
  r.masked_cells = v.masked_count();
  r.null_spec.eigenvalues = lambdas;
  r.null_spec.M = M;
  r.null_spec.seed = seed;
  r.null_spec.bandwidth = h;
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return r;
}

FixedCellResult fixed_cell_test(const CurveMatrix& m, const FqaParams& params,
                                double alpha, SigmaMode mode) {
  validate(m);
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("fixed_cell_test: alpha must be in (0,1)");
  const Eigen::Index T = m.series_length();

  std::vector<double> levels;
  if (params.tau == params.tau_prime) {
    levels = {params.tau};
  } else {
    levels = {std::min(params.tau, params.tau_prime),
              std::max(params.tau, params.tau_prime)};
  }
  const QuantileCurveSet qs = quantile_curves(m, levels);
  const ExcursionTable table = excursion_table(m, qs);
  const double rho = fqa_hat(table, params);  // throws on degenerate cells

  double sigma = 1.0;
  if (mode == SigmaMode::PlugIn) {
    // Sample standard deviation (denominator n-1) of the cell's summand
    // series.
    const Eigen::Index ci = params.tau == levels.front() ? 0 : 1;
    const Eigen::Index cj = params.tau_prime == levels.front() ? 0 : 1;
    const Eigen::Index n = T - params.lag;
    const double Td = static_cast<double>(T);
    Eigen::ArrayXd x(T), y(T);
    for (Eigen::Index t = 0; t < T; ++t) {
      x[t] = table.fractions(t, ci) <= params.beta ? 1.0 : 0.0;
      y[t] = table.fractions(t, cj) <= params.beta_prime ? 1.0 : 0.0;
    }
    const double phat = x.sum() / Td;
    const double qhat = y.sum() / Td;
    const double den = std::sqrt(phat * (1.0 - phat) * qhat * (1.0 - qhat));
    const Eigen::ArrayXd s =
        ((x.head(n) - phat) * (y.tail(n) - qhat)) / den;
    const double mean = s.sum() / static_cast<double>(n);
    const double var =
        (s - mean).square().sum() / static_cast<double>(n - 1);
    if (!(var > 0.0))
      throw DegenerateCellError(
          "fixed_cell_test: summand series has zero variance; the plug-in "
          "scale is undefined");
    sigma = std::sqrt(var);
  }

  FixedCellResult out;
  out.params = params;
  out.T = T;
  out.rho = rho;
  out.sigma = sigma;
  out.sigma_mode = mode;
  out.alpha = alpha;
  out.z = std::sqrt(static_cast<double>(T)) * rho / sigma;
  out.p_value = 2.0 * normal_cdf(-std::abs(out.z));
  const double half =
      sigma / std::sqrt(static_cast<double>(T)) * normal_quantile(1.0 - alpha / 2.0);
  out.ci_low = rho - half;
  out.ci_high = rho + half;
  return out;
}

std::string test_result_to_json(const TestResult& r, bool include_runtime) {
  nlohmann::ordered_json j;
  j["statistic"] = r.statistic;
  j["lag"] = r.lag;
  j["p_value"] = r.p_value;
  nlohmann::ordered_json cv = nlohmann::ordered_json::object();
  for (const auto& [alpha, c] : r.critical_values)
    cv[shortest_double(alpha)] = c;
  j["critical_values"] = cv;
  j["eigenvalue_count"] = r.null_spec.eigenvalues.size();
  j["masked_cells"] = r.masked_cells;
  j["seed"] = r.null_spec.seed;
  j["M"] = r.null_spec.M;
  j["bandwidth"] = r.null_spec.bandwidth;
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j.dump();
}

std::string fqa_vector_to_json(const FqaVector& v) {
  nlohmann::ordered_json j;
  j["lag"] = v.lag;
  j["source_T"] = v.source_T;
  j["reduced"] = v.grid.reduced;
  j["levels"] = v.grid.levels;
  j["thresholds"] = v.grid.thresholds;
  j["masked_cells"] = v.masked_count();
  std::vector<double> values(v.values.data(), v.values.data() + v.values.size());
  j["values"] = values;
  std::vector<int> mask(v.mask.begin(), v.mask.end());
  j["mask"] = mask;
  return j.dump();
}

}  // namespace fqa
