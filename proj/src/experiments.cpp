#include "fqa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fqa/rng.hpp"

namespace fqa {

namespace {

std::string shortest_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Runs fn(0..n-1) on `workers` threads.  Work items are claimed through an
// atomic counter; callers must write results into per-index slots so the
// outcome is identical for every worker count.
template <typename Fn>
void parallel_for(Eigen::Index n, int workers, Fn&& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const Eigen::Index i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<Eigen::Index>(n, static_cast<Eigen::Index>(workers)));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int w = 0; w < spawn; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void validate_experiment(const ExperimentSpec& spec) {
  validate_spec(spec.scenario);
  if (spec.replicates < 1)
    throw std::invalid_argument("experiment: replicates must be >= 1");
  if (spec.alphas.empty())
    throw std::invalid_argument("experiment: need at least one alpha");
  for (const double a : spec.alphas)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("experiment: alpha must be in (0,1)");
  if (spec.lag < 1 || spec.lag > spec.scenario.T - 2)
    throw std::invalid_argument("experiment: lag out of range for T");
}

// Runs one configuration: N replicates of generate + omnibus test, with
// seeds derived from (base_seed, replicate, config index).
ConfigResult run_config(const ExperimentSpec& spec,
                        const ScenarioSpec& scenario,
                        Eigen::Index config_index) {
  const Eigen::Index N = spec.replicates;
  const auto n_alpha = spec.alphas.size();
  std::vector<std::vector<char>> rejected(
      n_alpha, std::vector<char>(static_cast<std::size_t>(N), 0));
  std::vector<double> runtimes(static_cast<std::size_t>(N), 0.0);

  parallel_for(N, spec.parallelism, [&](Eigen::Index rep) {
    const std::uint64_t rep_seed =
        derive_seed(spec.base_seed, static_cast<std::uint64_t>(rep),
                    static_cast<std::uint64_t>(config_index));
    const CurveMatrix m = generate(scenario, derive_seed(rep_seed, 0));
    const TestResult r =
        omnibus_test(m, spec.lag, spec.grid, spec.alphas, spec.M,
                     derive_seed(rep_seed, 1), spec.bandwidth);
    for (std::size_t a = 0; a < n_alpha; ++a)
      rejected[a][static_cast<std::size_t>(rep)] =
          r.statistic > r.critical_values[a].second ? 1 : 0;
    runtimes[static_cast<std::size_t>(rep)] = r.runtime_seconds;
  });

  ConfigResult out;
  out.scenario = scenario;
  out.replicates = N;
  out.alphas = spec.alphas;
  for (std::size_t a = 0; a < n_alpha; ++a) {
    const auto count = static_cast<Eigen::Index>(std::count(
        rejected[a].begin(), rejected[a].end(), static_cast<char>(1)));
    const double rate =
        static_cast<double>(count) / static_cast<double>(N);
    out.rejections.push_back(count);
    out.rates.push_back(rate);
    out.std_errors.push_back(
        std::sqrt(rate * (1.0 - rate) / static_cast<double>(N)));
  }
  out.mean_runtime_seconds =
      std::accumulate(runtimes.begin(), runtimes.end(), 0.0) /
      static_cast<double>(N);
  return out;
}

}  // namespace

ExperimentReport run_size(const ExperimentSpec& spec) {
  validate_experiment(spec);
  if (spec.scenario.kind == ScenarioKind::Far1 ||
      spec.scenario.kind == ScenarioKind::Tfar1)
    std::fprintf(stderr,
                 "warning: size run requested for dependent scenario '%s'; "
                 "rates will reflect power, not size\n",
                 to_string(spec.scenario.kind).c_str());
  ExperimentReport report;
  report.spec = spec;
  report.configs.push_back(run_config(spec, spec.scenario, 0));
  return report;
}

ExperimentReport run_power(const ExperimentSpec& spec) {
  validate_experiment(spec);
  const ScenarioKind kind = spec.scenario.kind;
  if (kind != ScenarioKind::Far1 && kind != ScenarioKind::Tfar1)
    throw std::invalid_argument(
        "run_power: scenario kind must be far1 or tfar1");

  SweepSpec sweep;
  if (spec.sweep) {
    sweep = *spec.sweep;
    const std::string expected = kind == ScenarioKind::Far1 ? "c" : "C";
    if (sweep.name != expected)
      throw std::invalid_argument("run_power: sweep parameter must be '" +
                                  expected + "' for scenario " +
                                  to_string(kind));
    if (sweep.values.empty())
      throw std::invalid_argument("run_power: empty sweep");
  } else {
    sweep.name = kind == ScenarioKind::Far1 ? "c" : "C";
    sweep.values = {kind == ScenarioKind::Far1 ? spec.scenario.c
                                               : spec.scenario.C};
  }

  ExperimentReport report;
  report.spec = spec;
  report.spec.sweep = sweep;
  for (std::size_t k = 0; k < sweep.values.size(); ++k) {
    ScenarioSpec concrete = spec.scenario;
    if (kind == ScenarioKind::Far1)
      concrete.c = sweep.values[k];
    else
      concrete.C = sweep.values[k];
    validate_spec(concrete);  // stationarity of each sweep value
    ConfigResult r =
        run_config(spec, concrete, static_cast<Eigen::Index>(k));
    r.has_sweep = true;
    r.sweep_name = sweep.name;
    r.sweep_value = sweep.values[k];
    report.configs.push_back(std::move(r));
  }
  return report;
}

std::vector<TestResult> run_data_test(const CurveMatrix& m,
                                      const std::vector<Eigen::Index>& lags,
                                      const FqaGrid& grid,
                                      const std::vector<double>& alphas,
                                      Eigen::Index M, std::uint64_t seed,
                                      std::optional<Eigen::Index> bandwidth) {
  validate(m);
  if (lags.empty())
    throw std::invalid_argument("run_data_test: need at least one lag");
  const Eigen::Index T = m.series_length();
  for (const Eigen::Index l : lags)
    if (l < 1 || l > T - 2) {
      std::ostringstream msg;
      msg << "run_data_test: lag " << l << " out of range [1, " << T - 2
          << "] for series length " << T;
      throw std::invalid_argument(msg.str());
    }
  std::vector<TestResult> out;
  out.reserve(lags.size());
  for (std::size_t i = 0; i < lags.size(); ++i)
    out.push_back(omnibus_test(m, lags[i], grid, alphas, M,
                               derive_seed(seed, static_cast<std::uint64_t>(
                                                     lags[i])),
                               bandwidth));
  return out;
}

std::vector<TestResult> run_data_test(const std::filesystem::path& path,
                                      bool has_header, bool apply_log_returns,
                                      const std::vector<Eigen::Index>& lags,
                                      const FqaGrid& grid,
                                      const std::vector<double>& alphas,
                                      Eigen::Index M, std::uint64_t seed,
                                      std::optional<Eigen::Index> bandwidth) {
  CurveMatrix m = load_csv(path, has_header);
  if (apply_log_returns) m = log_returns(m);
  return run_data_test(m, lags, grid, alphas, M, seed, bandwidth);
}

CurveMatrix shuffle_series(const CurveMatrix& m, std::uint64_t seed) {
  const Eigen::Index T = m.series_length();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  for (Eigen::Index i = T - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(
                  rng.below(static_cast<std::uint64_t>(i + 1)))]);
  CurveMatrix out;
  out.values.resize(T, m.grid_size());
  for (Eigen::Index t = 0; t < T; ++t)
    out.values.row(t) = m.values.row(order[static_cast<std::size_t>(t)]);
  return out;
}

TimingSummary time_pipeline(const ExperimentSpec& spec) {
  validate_experiment(spec);
  TimingSummary s;
  s.replicates = spec.replicates;
  double total = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Eigen::Index rep = 0; rep < spec.replicates; ++rep) {
    const std::uint64_t rep_seed =
        derive_seed(spec.base_seed, static_cast<std::uint64_t>(rep), 0);
    // Generation happens outside the omnibus clock; the TestResult's own
    // runtime covers exactly the pipeline.
    const CurveMatrix m = generate(spec.scenario, derive_seed(rep_seed, 0));
    const TestResult r =
        omnibus_test(m, spec.lag, spec.grid, spec.alphas, spec.M,
                     derive_seed(rep_seed, 1), spec.bandwidth);
    total += r.runtime_seconds;
    lo = std::min(lo, r.runtime_seconds);
    hi = std::max(hi, r.runtime_seconds);
  }
  s.mean_seconds = total / static_cast<double>(spec.replicates);
  s.min_seconds = lo;
  s.max_seconds = hi;
  return s;
}

namespace {

std::string scenario_param_string(const ScenarioSpec& s) {
  switch (s.kind) {
    case ScenarioKind::Far1: return shortest_double(s.c);
    case ScenarioKind::Tfar1: return shortest_double(s.C);
    default: return "";
  }
}

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(s.kind);
  j["T"] = s.T;
  j["p"] = s.p;
  if (s.kind == ScenarioKind::Far1) j["c"] = s.c;
  if (s.kind == ScenarioKind::Tfar1) j["C"] = s.C;
  if (s.kind == ScenarioKind::Far1 || s.kind == ScenarioKind::Tfar1) {
    j["noise"] = to_string(s.noise);
    j["burn_in"] = s.burn_in;
  }
  if (s.contamination) {
    j["contamination"] = {{"curve_frac", s.contamination->curve_frac},
                          {"point_frac", s.contamination->point_frac},
                          {"height", s.contamination->height}};
  } else {
    j["contamination"] = nullptr;
  }
  return j;
}

}  // namespace

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "scenario,noise,T,p,param,lag,levels,reduced,M,bandwidth,base_seed,"
         "contaminated,N,alpha,rejections,rate,se\n";
  const ExperimentSpec& spec = report.spec;
  const std::string bw =
      spec.bandwidth ? std::to_string(*spec.bandwidth) : "auto";
  for (const ConfigResult& cfg : report.configs) {
    const ScenarioSpec& sc = cfg.scenario;
    const bool ar =
        sc.kind == ScenarioKind::Far1 || sc.kind == ScenarioKind::Tfar1;
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      out << to_string(sc.kind) << ',' << (ar ? to_string(sc.noise) : "")
          << ',' << sc.T << ',' << sc.p << ','
          << scenario_param_string(sc) << ',' << spec.lag << ','
          << spec.grid.level_count() << ','
          << (spec.grid.reduced ? "yes" : "no") << ',' << spec.M << ',' << bw
          << ',' << spec.base_seed << ','
          << (sc.contamination ? "yes" : "no") << ',' << cfg.replicates
          << ',' << shortest_double(cfg.alphas[a]) << ',' << cfg.rejections[a]
          << ',' << shortest_double(cfg.rates[a]) << ','
          << shortest_double(cfg.std_errors[a]) << '\n';
    }
  }
  return out.str();
}

std::string report_to_json(const ExperimentReport& report,
                           bool include_runtime) {
  const ExperimentSpec& spec = report.spec;
  nlohmann::ordered_json j;
  j["format_version"] = report.format_version;
  j["scenario"] = scenario_to_json(spec.scenario);
  j["replicates"] = spec.replicates;
  j["alphas"] = spec.alphas;
  j["lag"] = spec.lag;
  j["levels"] = spec.grid.levels;
  j["reduced"] = spec.grid.reduced;
  if (!spec.grid.reduced) j["thresholds"] = spec.grid.thresholds;
  j["M"] = spec.M;
  if (spec.bandwidth)
    j["bandwidth"] = *spec.bandwidth;
  else
    j["bandwidth"] = "auto";
  j["base_seed"] = spec.base_seed;
  if (spec.sweep) {
    j["sweep"] = {{"name", spec.sweep->name},
                  {"values", spec.sweep->values}};
  }
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (const ConfigResult& cfg : report.configs) {
    nlohmann::ordered_json c;
    if (cfg.has_sweep) {
      c["sweep_name"] = cfg.sweep_name;
      c["sweep_value"] = cfg.sweep_value;
    }
    c["scenario"] = scenario_to_json(cfg.scenario);
    c["replicates"] = cfg.replicates;
    c["alphas"] = cfg.alphas;
    nlohmann::ordered_json rej = nlohmann::ordered_json::array();
    for (const Eigen::Index r : cfg.rejections) rej.push_back(r);
    c["rejections"] = rej;
    c["rates"] = cfg.rates;
    c["std_errors"] = cfg.std_errors;
    if (include_runtime)
      c["mean_runtime_seconds"] = cfg.mean_runtime_seconds;
    configs.push_back(std::move(c));
  }
  j["configs"] = configs;
  return j.dump(2);
}

std::string report_to_gnuplot(const ExperimentReport& report, double alpha) {
  std::ostringstream out;
  out << "# " << to_string(report.spec.scenario.kind)
      << " rejection rate at alpha=" << shortest_double(alpha)
      << "\n# sweep_value rate se\n";
  for (const ConfigResult& cfg : report.configs) {
    const auto it =
        std::find_if(cfg.alphas.begin(), cfg.alphas.end(),
                     [&](double a) { return std::abs(a - alpha) <= 1e-12; });
    if (it == cfg.alphas.end())
      throw std::invalid_argument(
          "report_to_gnuplot: alpha not present in the report");
    const auto a = static_cast<std::size_t>(it - cfg.alphas.begin());
    out << shortest_double(cfg.has_sweep ? cfg.sweep_value : 0.0) << ' '
        << shortest_double(cfg.rates[a]) << ' '
        << shortest_double(cfg.std_errors[a]) << '\n';
  }
  return out.str();
}

std::string results_to_json(const std::vector<TestResult>& results,
                            bool include_runtime) {
  std::string out = "[";
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i > 0) out += ",";
    out += test_result_to_json(results[i], include_runtime);
  }
  out += "]";
  return out;
}

std::string results_to_table(const std::vector<TestResult>& results) {
  std::ostringstream out;
  std::vector<std::string> reject_headers;
  if (!results.empty())
    for (const auto& [alpha, c] : results.front().critical_values)
      reject_headers.push_back("reject@" + shortest_double(alpha));

  out << "lag   statistic  p_value  masked";
  for (const std::string& h : reject_headers) out << "  " << h;
  out << '\n';
  char buf[64];
  for (const TestResult& r : results) {
    std::snprintf(buf, sizeof buf, "%3lld  %10.4f    %.3f  %6lld",
                  static_cast<long long>(r.lag), r.statistic, r.p_value,
                  static_cast<long long>(r.masked_cells));
    out << buf;
    for (std::size_t a = 0; a < r.critical_values.size(); ++a) {
      const bool reject = r.statistic > r.critical_values[a].second;
      std::string cell(reject_headers[a].size(), ' ');
      cell.replace(0, reject ? 3 : 2, reject ? "yes" : "no");
      out << "  " << cell;
    }
    out << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open '" + path.string() +
                             "' for writing");
  out.write(content.data(),
            static_cast<std::streamsize>(content.size()));
  if (!out)
    throw std::runtime_error("write error on '" + path.string() + "'");
}

}  // namespace fqa
