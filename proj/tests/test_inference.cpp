#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "fqa/inference.hpp"
#include "fqa/rng.hpp"
#include "fqa/scenarios.hpp"
#include "oracle.hpp"

namespace {

fqa::CurveMatrix matrix_from(const Eigen::MatrixXd& values) {
  fqa::CurveMatrix m;
  m.values = values;
  return m;
}

Eigen::MatrixXd f1_matrix() {
  Eigen::MatrixXd f1(6, 3);
  f1 << 3, 1, 4,
        1, 5, 9,
        2, 6, 5,
        3, 5, 8,
        9, 7, 9,
        3, 2, 3;
  return f1;
}

const std::vector<double> kF1Levels{1.0 / 3.0, 2.0 / 3.0};

fqa::ExcursionTable table_of(const fqa::CurveMatrix& m,
                             const std::vector<double>& levels) {
  return fqa::excursion_table(m, fqa::quantile_curves(m, levels));
}

}  // namespace

TEST_SUITE_BEGIN("inference");

TEST_CASE("normal quantile and CDF hit the reference points") {
  CHECK(fqa::normal_cdf(0.0) == 0.5);
  CHECK(std::abs(fqa::normal_cdf(1.959964) - 0.975) <= 1e-6);
  CHECK(fqa::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(fqa::normal_quantile(0.975) - 1.959964) <= 1e-6);
  CHECK(std::abs(fqa::normal_quantile(0.025) + fqa::normal_quantile(0.975)) <=
        1e-12);
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    const double back = fqa::normal_quantile(fqa::normal_cdf(x));
    CHECK(std::abs(back - x) <= 1e-8);
  }
  CHECK_THROWS_AS(fqa::normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(fqa::normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("summands of a constant-fraction table form an empty matrix") {
  fqa::CurveMatrix m;
  m.values = Eigen::MatrixXd::Constant(14, 5, 2.0);
  const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced({0.3, 0.7});
  const fqa::SummandMatrix s =
      fqa::indicator_summands(table_of(m, grid.levels), grid, 1);
  CHECK(s.cell_count() == 0);
  CHECK(s.count() == 13);
  CHECK(s.cells.empty());
}

TEST_CASE("fixture summands match the frozen oracle matrix") {
  const fqa::CurveMatrix m = matrix_from(f1_matrix());
  const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced(kF1Levels);
  const fqa::SummandMatrix s =
      fqa::indicator_summands(table_of(m, kF1Levels), grid, 1);
  REQUIRE(s.count() == 5);
  REQUIRE(s.cell_count() == 4);

  // Frozen from the brute-force oracle (rows t = 1..5, cells in grid order).
  Eigen::MatrixXd expected(5, 4);
  expected << -1.0, -1.4142135623730949, -0.70710678118654757, -1.0,
      0.50000000000000011, 0.70710678118654757, 0.70710678118654757, 1.0,
      0.50000000000000011, -0.70710678118654757, 0.70710678118654757, -1.0,
      0.50000000000000011, 0.70710678118654757, -0.70710678118654757, -1.0,
      -1.0, -0.70710678118654757, -1.4142135623730949, -1.0;
  for (Eigen::Index t = 0; t < 5; ++t)
    for (Eigen::Index c = 0; c < 4; ++c)
      CHECK(std::abs(s.rows(t, c) - expected(t, c)) <= 1e-12);
  for (Eigen::Index c = 0; c < 4; ++c)
    CHECK(s.cells[static_cast<std::size_t>(c)] == c);
}

TEST_CASE("summands match the brute-force recomputation on random data") {
  fqa::Rng rng(31337);
  for (int rep = 0; rep < 8; ++rep) {
    const Eigen::Index T = 9 + static_cast<Eigen::Index>(rng.below(4));
    Eigen::MatrixXd data(T, 4);
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index j = 0; j < 4; ++j)
        data(t, j) = rep % 2 == 0 ? rng.normal()
                                  : static_cast<double>(rng.below(4));
    const std::vector<double> levels{0.35, 0.65};
    const fqa::CurveMatrix m = matrix_from(data);
    const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced(levels);
    const fqa::SummandMatrix s =
        fqa::indicator_summands(table_of(m, levels), grid, 1);
    const Eigen::MatrixXd expected =
        oracle::summands(data, levels, levels, true, 1);
    REQUIRE(s.rows.rows() == expected.rows());
    REQUIRE(s.rows.cols() == expected.cols());
    for (Eigen::Index t = 0; t < expected.rows(); ++t)
      for (Eigen::Index c = 0; c < expected.cols(); ++c)
        CHECK(std::abs(s.rows(t, c) - expected(t, c)) <= 1e-12);
  }
}

TEST_CASE("summand column means are near zero on null data") {
  const fqa::CurveMatrix m = matrix_from(fqa::gen_gaussian_wn(500, 100, 6).values);
  const fqa::FqaGrid grid = fqa::FqaGrid::reduced_default();
  const fqa::SummandMatrix s =
      fqa::indicator_summands(table_of(m, grid.levels), grid, 1);
  // Each column mean is ~N(0, 1/T); 4.5 standard deviations keeps the
  // union over all 361 columns comfortably improbable.
  const double bound = 4.5 / std::sqrt(500.0);
  for (Eigen::Index c = 0; c < s.cell_count(); ++c)
    CHECK(std::abs(s.rows.col(c).mean()) <= bound);
}

TEST_CASE("identical summand rows give a zero covariance") {
  fqa::SummandMatrix s;
  s.rows = Eigen::MatrixXd::Ones(12, 3);
  s.lag = 1;
  s.source_T = 13;
  const Eigen::MatrixXd omega = fqa::estimate_omega(s, 2);
  CHECK(omega.rows() == 3);
  CHECK(omega.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("bandwidth zero reduces to the sample covariance") {
  const fqa::CurveMatrix m = matrix_from(fqa::gen_brownian(41, 15, 12).values);
  const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced({0.25, 0.5, 0.75});
  const fqa::SummandMatrix s =
      fqa::indicator_summands(table_of(m, grid.levels), grid, 1);
  REQUIRE(s.cell_count() > 0);

  const Eigen::MatrixXd omega = fqa::estimate_omega(s, 0);
  Eigen::MatrixXd centered = s.rows;
  centered.rowwise() -= s.rows.colwise().mean();
  const Eigen::MatrixXd direct =
      (centered.transpose() * centered) / static_cast<double>(s.count());
  CHECK((omega - direct).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("lag-window covariance matches the brute-force formula") {
  const fqa::CurveMatrix m = matrix_from(fqa::gen_far1(40, 12, 0.5,
                                                       fqa::NoiseKind::Gaussian,
                                                       21).values);
  const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced({0.3, 0.6});
  const fqa::SummandMatrix s =
      fqa::indicator_summands(table_of(m, grid.levels), grid, 1);
  REQUIRE(s.count() == 39);
  for (const long h : {0L, 1L, 3L}) {
    const Eigen::MatrixXd omega = fqa::estimate_omega(s, h);
    const Eigen::MatrixXd expected = oracle::long_run_cov(s.rows, h);
    // Bartlett weights keep the raw estimate PSD, so the projection inside
    // estimate_omega only reshuffles rounding noise.
    CHECK((omega - expected).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((omega - omega.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::VectorXd lam = fqa::eigenvalues(omega);
    CHECK(lam.minCoeff() >= 0.0);
  }
}

TEST_CASE("covariance needs at least ten rows") {
  fqa::SummandMatrix s;
  s.rows = Eigen::MatrixXd::Ones(9, 2);
  CHECK_THROWS_AS(fqa::estimate_omega(s, 1), std::invalid_argument);
  CHECK_THROWS_AS(fqa::estimate_omega(s, -1), std::invalid_argument);
}

TEST_CASE("null summand variances are close to one") {
  // Standardized summands have unit variance when the lagged indicators are
  // independent; the diagonal of the h=0 covariance estimates exactly that.
  const int reps = 12;
  std::vector<Eigen::VectorXd> diags;
  for (int r = 0; r < reps; ++r) {
    const fqa::CurveMatrix m =
        matrix_from(fqa::gen_gaussian_wn(1000, 200, 4000 + r).values);
    const fqa::FqaGrid grid = fqa::FqaGrid::reduced_default();
    const fqa::SummandMatrix s =
        fqa::indicator_summands(table_of(m, grid.levels), grid, 1);
    REQUIRE(s.cell_count() == 361);
    diags.push_back(fqa::estimate_omega(s, 0).diagonal());
  }
  for (Eigen::Index c = 0; c < 361; ++c) {
    std::vector<double> vals;
    for (const auto& d : diags) vals.push_back(d[c]);
    std::nth_element(vals.begin(), vals.begin() + reps / 2, vals.end());
    const double median = vals[reps / 2];
    CHECK(median >= 0.8);
    CHECK(median <= 1.2);
  }
}

TEST_CASE("eigenvalues of simple matrices") {
  const Eigen::VectorXd ident = fqa::eigenvalues(Eigen::MatrixXd::Identity(3, 3));
  for (Eigen::Index j = 0; j < 3; ++j)
    CHECK(ident[j] == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 2.0, 0.0, 1.0;
  const Eigen::VectorXd lam = fqa::eigenvalues(d);
  CHECK(lam[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lam[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lam[2] == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::VectorXd v(4);
  v << 2.0, 0.0, 1.0, 0.0;  // squared norm 5
  const Eigen::MatrixXd rank1 = v * v.transpose();
  const Eigen::VectorXd lam1 = fqa::eigenvalues(rank1);
  CHECK(std::abs(lam1[0] - 5.0) <= 1e-10);
  for (Eigen::Index j = 1; j < 4; ++j) CHECK(std::abs(lam1[j]) <= 1e-10);

  Eigen::MatrixXd notsym(2, 2);
  notsym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(fqa::eigenvalues(notsym), std::invalid_argument);
}

TEST_CASE("eigenvalue sum equals the trace") {
  fqa::Rng rng(64);
  Eigen::MatrixXd a(6, 6);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) a(i, j) = rng.normal();
  const Eigen::MatrixXd psd = a * a.transpose();
  const Eigen::VectorXd lam = fqa::eigenvalues(psd);
  CHECK(std::abs(lam.sum() - psd.trace()) <= 1e-8 * std::abs(psd.trace()));
  for (Eigen::Index j = 0; j + 1 < 6; ++j) CHECK(lam[j] >= lam[j + 1]);
}

TEST_CASE("Monte Carlo null sample has chi-square moments") {
  Eigen::VectorXd one(1);
  one << 1.0;
  const std::vector<double> q1 = fqa::mc_null_sample(one, 100000, 11);
  const double mean1 =
      std::accumulate(q1.begin(), q1.end(), 0.0) / static_cast<double>(q1.size());
  CHECK(std::abs(mean1 - 1.0) <= 0.03);
  CHECK(std::is_sorted(q1.begin(), q1.end()));

  Eigen::VectorXd two(2);
  two << 1.0, 1.0;
  const std::vector<double> q2 = fqa::mc_null_sample(two, 100000, 12);
  const double mean2 =
      std::accumulate(q2.begin(), q2.end(), 0.0) / static_cast<double>(q2.size());
  CHECK(std::abs(mean2 - 2.0) <= 0.04);

  const std::vector<double> zeros =
      fqa::mc_null_sample(Eigen::VectorXd::Zero(3), 500, 13);
  for (const double q : zeros) CHECK(q == 0.0);
}

TEST_CASE("Monte Carlo sample is seed-deterministic and chunk-stable") {
  Eigen::VectorXd lam(2);
  lam << 2.0, 0.5;
  const auto a = fqa::mc_null_sample(lam, 3000, 99);
  const auto b = fqa::mc_null_sample(lam, 3000, 99);
  CHECK(a == b);
  const auto c = fqa::mc_null_sample(lam, 3000, 100);
  CHECK(a != c);

  // The first chunk of a longer run is the whole of a shorter run: draws
  // depend only on (seed, chunk index), never on M.
  auto small = fqa::mc_null_sample(lam, 1024, 7);
  auto big = fqa::mc_null_sample(lam, 2048, 7);
  std::sort(small.begin(), small.end());
  std::sort(big.begin(), big.end());
  for (const double q : small)
    CHECK(std::binary_search(big.begin(), big.end(), q));
}

TEST_CASE("p-values and critical values mesh exactly") {
  const std::vector<double> sorted{1.0, 2.0, 3.0, 4.0};
  CHECK(fqa::mc_p_value(sorted, 2.5) == doctest::Approx(3.0 / 5.0).epsilon(1e-15));
  CHECK(fqa::mc_p_value(sorted, 5.0) == doctest::Approx(1.0 / 5.0).epsilon(1e-15));
  CHECK(fqa::mc_p_value(sorted, 0.0) == 1.0);
  CHECK(fqa::mc_p_value(sorted, 4.0) == doctest::Approx(2.0 / 5.0).epsilon(1e-15));

  std::vector<double> nine;
  for (int i = 1; i <= 9; ++i) nine.push_back(static_cast<double>(i));
  CHECK(fqa::mc_critical_value(nine, 0.5) == 4.0);

  // Decision consistency: statistic > c exactly when p < alpha + 1.5/(M+1).
  fqa::Rng rng(2);
  std::vector<double> sample(200);
  for (double& q : sample) q = std::abs(rng.normal()) * 3.0;
  std::sort(sample.begin(), sample.end());
  const double M = static_cast<double>(sample.size());
  for (const double alpha : {0.01, 0.05, 0.1, 0.25, 0.5}) {
    const double c = fqa::mc_critical_value(sample, alpha);
    for (const double base : sample)
      for (const double stat : {base - 0.25, base, base + 0.25}) {
        const bool reject_by_c = stat > c;
        const bool reject_by_p =
            fqa::mc_p_value(sample, stat) < alpha + 1.5 / (M + 1.0);
        CHECK(reject_by_c == reject_by_p);
      }
  }
}

TEST_CASE("auto bandwidth is the cube root rounded down") {
  CHECK(fqa::auto_bandwidth(8) == 2);
  CHECK(fqa::auto_bandwidth(27) == 3);
  CHECK(fqa::auto_bandwidth(200) == 5);
  CHECK(fqa::auto_bandwidth(1000) == 10);
}

TEST_CASE("omnibus test is deterministic and internally consistent") {
  const fqa::CurveMatrix m = matrix_from(fqa::gen_gaussian_wn(80, 30, 5150).values);
  const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced({0.2, 0.4, 0.6, 0.8});
  const std::vector<double> alphas{0.01, 0.05, 0.1, 0.3};
  const fqa::TestResult r1 = fqa::omnibus_test(m, 1, grid, alphas, 2000, 42);
  const fqa::TestResult r2 = fqa::omnibus_test(m, 1, grid, alphas, 2000, 42);
  CHECK(fqa::test_result_to_json(r1, false) == fqa::test_result_to_json(r2, false));

  REQUIRE(r1.critical_values.size() == alphas.size());
  const double slack = 1.5 / (static_cast<double>(r1.null_spec.M) + 1.0);
  for (const auto& [alpha, c] : r1.critical_values) {
    const bool reject_by_c = r1.statistic > c;
    const bool reject_by_p = r1.p_value < alpha + slack;
    CHECK(reject_by_c == reject_by_p);
  }
  // Critical values decrease as alpha grows.
  for (std::size_t i = 0; i + 1 < r1.critical_values.size(); ++i)
    CHECK(r1.critical_values[i].second >= r1.critical_values[i + 1].second);

  CHECK(r1.lag == 1);
  CHECK(r1.statistic >= 0.0);
  CHECK(r1.null_spec.seed == 42);
  CHECK(r1.null_spec.bandwidth == fqa::auto_bandwidth(80));
}

TEST_CASE("omnibus test rejects impossible inputs") {
  const fqa::CurveMatrix m = matrix_from(fqa::gen_gaussian_wn(30, 10, 9).values);
  const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced({0.5});
  CHECK_THROWS_AS(fqa::omnibus_test(m, 29, grid, {0.05}, 1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(fqa::omnibus_test(m, 25, grid, {0.05}, 1000, 1),
                  std::invalid_argument);  // T - lag < 10
  CHECK_THROWS_AS(fqa::omnibus_test(m, 1, grid, {0.05}, 999, 1),
                  std::invalid_argument);  // M too small
  CHECK_THROWS_AS(fqa::omnibus_test(m, 1, grid, {}, 1000, 1),
                  std::invalid_argument);

  fqa::CurveMatrix constant;
  constant.values = Eigen::MatrixXd::Constant(40, 8, 1.0);
  CHECK_THROWS_WITH_AS(fqa::omnibus_test(constant, 1, grid, {0.05}, 1000, 1),
                       doctest::Contains("degenerate"), std::invalid_argument);
}

TEST_CASE("null p-values are close to uniform") {
  const int reps = 300;
  const fqa::FqaGrid grid =
      fqa::FqaGrid::make_reduced(fqa::level_range(0.1, 0.9, 0.1));
  int below_10 = 0, below_50 = 0;
  for (int r = 0; r < reps; ++r) {
    const fqa::CurveMatrix m =
        matrix_from(fqa::gen_gaussian_wn(200, 100, 7000 + r).values);
    const fqa::TestResult res =
        fqa::omnibus_test(m, 1, grid, {0.05}, 2000, 9000 + r);
    if (res.p_value <= 0.1) ++below_10;
    if (res.p_value <= 0.5) ++below_50;
  }
  const double f10 = below_10 / static_cast<double>(reps);
  const double f50 = below_50 / static_cast<double>(reps);
  CHECK(f10 >= 0.048);
  CHECK(f10 <= 0.152);
  CHECK(f50 >= 0.413);
  CHECK(f50 <= 0.587);
}

TEST_CASE("test result serializes with the documented fields") {
  const fqa::CurveMatrix m = matrix_from(fqa::gen_gaussian_wn(60, 20, 77).values);
  const fqa::FqaGrid grid = fqa::FqaGrid::make_reduced({0.3, 0.5, 0.7});
  const fqa::TestResult r =
      fqa::omnibus_test(m, 2, grid, {0.05, 0.01}, 1500, 8);

  const auto full = nlohmann::json::parse(fqa::test_result_to_json(r));
  const std::vector<std::string> keys{
      "statistic", "lag",  "p_value",   "critical_values", "eigenvalue_count",
      "masked_cells", "seed", "M", "bandwidth", "runtime_seconds"};
  for (const auto& key : keys) CHECK(full.contains(key));
  CHECK(full["lag"] == 2);
  CHECK(full["M"] == 1500);
  CHECK(full["seed"] == 8);
  CHECK(full["critical_values"].size() == 2);

  const auto stable = nlohmann::json::parse(fqa::test_result_to_json(r, false));
  CHECK(!stable.contains("runtime_seconds"));
  for (const auto& key : keys)
    if (key != "runtime_seconds") CHECK(stable.contains(key));

  const fqa::ExcursionTable table = table_of(m, grid.levels);
  const auto cells =
      nlohmann::json::parse(fqa::fqa_vector_to_json(fqa::fqa_vector(table, grid, 2)));
  for (const auto& key : {"lag", "source_T", "reduced", "levels", "thresholds",
                          "masked_cells", "values", "mask"})
    CHECK(cells.contains(key));
  CHECK(cells["values"].size() == 9);
}

TEST_CASE("a perfectly uncorrelated cell gives z = 0 and p = 1") {
  const fqa::CurveMatrix m = matrix_from(f1_matrix());
  fqa::FqaParams params;
  params.tau = 1.0 / 3.0;
  params.tau_prime = 2.0 / 3.0;
  params.beta = 1.0 / 3.0;
  params.beta_prime = 2.0 / 3.0;
  params.lag = 1;
  const fqa::FixedCellResult r = fqa::fixed_cell_test(m, params, 0.05);
  CHECK(r.rho == 0.0);
  CHECK(r.z == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(r.sigma == 1.0);
  CHECK(r.ci_low == -r.ci_high);
  CHECK(r.ci_low < 0.0);
}

TEST_CASE("confidence interval half-width uses the normal quantile") {
  const fqa::CurveMatrix m = matrix_from(fqa::gen_brownian(100, 20, 3).values);
  fqa::FqaParams params;
  params.tau = params.tau_prime = params.beta = params.beta_prime = 0.5;
  params.lag = 1;
  const fqa::FixedCellResult r = fqa::fixed_cell_test(m, params, 0.05);
  const double half = (r.ci_high - r.ci_low) / 2.0;
  CHECK(std::abs(half - 1.959964 * r.sigma / std::sqrt(100.0)) <= 1e-6);
  CHECK(r.ci_low == doctest::Approx(r.rho - half).epsilon(1e-12));
  CHECK(std::abs(r.z - std::sqrt(100.0) * r.rho / r.sigma) <= 1e-12);
  CHECK(r.p_value == doctest::Approx(2.0 * fqa::normal_cdf(-std::abs(r.z)))
                         .epsilon(1e-12));
}

TEST_CASE("plug-in sigma is the sample deviation of the summands") {
  const fqa::CurveMatrix m = matrix_from(f1_matrix());
  fqa::FqaParams params;
  params.tau = params.tau_prime = 2.0 / 3.0;
  params.beta = params.beta_prime = 2.0 / 3.0;
  params.lag = 1;
  const fqa::FixedCellResult r =
      fqa::fixed_cell_test(m, params, 0.05, fqa::SigmaMode::PlugIn);
  // Frozen summand column: (-1, 1, -1, -1, -1); sample variance 0.8.
  CHECK(std::abs(r.sigma - std::sqrt(0.8)) <= 1e-12);
  CHECK(r.sigma_mode == fqa::SigmaMode::PlugIn);
}

TEST_CASE("degenerate cells are rejected in both sigma modes") {
  fqa::CurveMatrix constant;
  constant.values = Eigen::MatrixXd::Constant(12, 6, 1.0);
  fqa::FqaParams params;
  params.tau = params.tau_prime = params.beta = params.beta_prime = 0.5;
  params.lag = 1;
  CHECK_THROWS_AS(fqa::fixed_cell_test(constant, params, 0.05),
                  fqa::DegenerateCellError);

  // Alternating rows: marginals are 1/2 but the lag-2 summands are constant,
  // so the plug-in deviation degenerates while the null-calibrated mode works.
  fqa::CurveMatrix alternating;
  alternating.values.resize(12, 4);
  for (Eigen::Index t = 0; t < 12; ++t)
    alternating.values.row(t).setConstant(t % 2 == 0 ? -1.0 : 1.0);
  params.lag = 2;
  CHECK_NOTHROW(fqa::fixed_cell_test(alternating, params, 0.05));
  CHECK_THROWS_AS(fqa::fixed_cell_test(alternating, params, 0.05,
                                       fqa::SigmaMode::PlugIn),
                  fqa::DegenerateCellError);
}

TEST_CASE("fixed-cell rejection is calibrated on null data") {
  const int reps = 400;
  int rejections = 0;
  fqa::FqaParams params;
  params.tau = params.tau_prime = params.beta = params.beta_prime = 0.5;
  params.lag = 1;
  for (int r = 0; r < reps; ++r) {
    const fqa::CurveMatrix m =
        matrix_from(fqa::gen_brownian(500, 100, 12000 + r).values);
    const fqa::FixedCellResult res = fqa::fixed_cell_test(m, params, 0.05);
    if (res.p_value < 0.05) ++rejections;
  }
  const double rate = rejections / static_cast<double>(reps);
  CHECK(rate >= 0.017);  // 0.05 +- 3 binomial SE at 400 replicates
  CHECK(rate <= 0.083);
}

TEST_SUITE_END();
