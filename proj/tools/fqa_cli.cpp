// Command-line front end: white-noise testing of functional time series from
// CSV, scenario simulation, and size/power studies.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fqa/experiments.hpp"

namespace {

using fqa::FqaGrid;

std::vector<double> parse_prob_list(const std::string& text,
                                    const char* what) {
  // Either start:end:step or a comma-separated list.
  try {
    if (text.find(':') != std::string::npos) {
      double a = 0, b = 0, s = 0;
      char colon1 = 0, colon2 = 0;
      std::istringstream in(text);
      if (!(in >> a >> colon1 >> b >> colon2 >> s) || colon1 != ':' ||
          colon2 != ':' || !in.eof())
        throw std::invalid_argument("bad range");
      return fqa::level_range(a, b, s);
    }
    std::vector<double> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": cannot parse '" +
                                text +
                                "' (expected start:end:step or v1,v2,...)");
  }
}

std::vector<Eigen::Index> parse_lags(const std::string& text) {
  try {
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
      const long lo = std::stol(text.substr(0, dots));
      const long hi = std::stol(text.substr(dots + 2));
      if (lo < 1 || hi < lo) throw std::invalid_argument("bad range");
      std::vector<Eigen::Index> out;
      for (long l = lo; l <= hi; ++l) out.push_back(l);
      return out;
    }
    std::vector<Eigen::Index> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) out.push_back(std::stol(item));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("--lags: cannot parse '" + text +
                                "' (expected N, N..M, or l1,l2,...)");
  }
}

std::optional<Eigen::Index> parse_bandwidth(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    const long h = std::stol(text);
    if (h < 0) throw std::invalid_argument("negative");
    return h;
  } catch (const std::exception&) {
    throw std::invalid_argument("--bandwidth: expected 'auto' or a "
                                "nonnegative integer, got '" +
                                text + "'");
  }
}

fqa::Contamination parse_contaminate(const std::string& text) {
  double cf = 0, pf = 0, h = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> cf >> c1 >> pf >> c2 >> h) || c1 != ',' || c2 != ',' ||
      !in.eof())
    throw std::invalid_argument(
        "--contaminate: expected curve_frac,point_frac,height, got '" + text +
        "'");
  return fqa::Contamination{cf, pf, h};
}

fqa::SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument(
        "--sweep: expected name=start:end:step or name=v1,v2,..., got '" +
        text + "'");
  fqa::SweepSpec sweep;
  sweep.name = text.substr(0, eq);
  const std::string values = text.substr(eq + 1);
  try {
    if (values.find(':') != std::string::npos) {
      double a = 0, b = 0, s = 0;
      char colon1 = 0, colon2 = 0;
      std::istringstream in(values);
      if (!(in >> a >> colon1 >> b >> colon2 >> s) || colon1 != ':' ||
          colon2 != ':' || !in.eof())
        throw std::invalid_argument("bad range");
      const auto count =
          static_cast<long>(std::floor((b - a) / s + 1e-9)) + 1;
      for (long i = 0; i < count; ++i)
        sweep.values.push_back(a + static_cast<double>(i) * s);
    } else {
      std::string item;
      std::istringstream in(values);
      while (std::getline(in, item, ',')) sweep.values.push_back(std::stod(item));
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("--sweep: cannot parse values in '" + text +
                                "'");
  }
  if (sweep.values.empty())
    throw std::invalid_argument("--sweep: no values in '" + text + "'");
  return sweep;
}

FqaGrid build_grid(const std::string& levels_text, bool general,
                   const std::string& thresholds_text) {
  const std::vector<double> levels = parse_prob_list(levels_text, "--levels");
  if (!general) return FqaGrid::make_reduced(levels);
  return FqaGrid::make_general(
      levels, parse_prob_list(thresholds_text, "--thresholds"));
}

// ---- subcommand option bags -------------------------------------------

struct TestOpts {
  std::string csv;
  bool has_header = false;
  bool log_ret = false;
  std::string lags = "1";
  std::string alphas = "0.05";
  std::string levels = "0.05:0.95:0.05";
  bool general = false;
  std::string thresholds;
  Eigen::Index mc = 10000;
  std::string bandwidth = "auto";
  std::uint64_t seed = 1;
  std::string out;
  bool emit_cells = false;
};

struct SimulateOpts {
  std::string scenario;
  Eigen::Index T = 200;
  Eigen::Index p = 500;
  double c = 0.0;
  double C = 0.0;
  std::string noise = "gaussian";
  Eigen::Index burn_in = 50;
  std::string contaminate;
  std::uint64_t seed = 1;
  std::string out;
};

struct StudyOpts {  // shared by size and power
  std::string scenario;
  Eigen::Index T = 200;
  Eigen::Index p = 500;
  Eigen::Index N = 500;
  Eigen::Index lag = 1;
  std::string alphas = "0.05";
  std::string levels = "0.05:0.95:0.05";
  Eigen::Index mc = 10000;
  std::string bandwidth = "auto";
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  // power extras
  std::string noise = "gaussian";
  std::string sweep;
  std::string contaminate;
  double c = 0.0;
  double C = 0.0;
  Eigen::Index burn_in = 50;
};

std::vector<double> parse_alpha_list(const std::string& text) {
  return parse_prob_list(text, "--alpha");
}

int run_test_cmd(const TestOpts& o) {
  const FqaGrid grid = build_grid(o.levels, o.general, o.thresholds);
  const std::vector<fqa::TestResult> results = fqa::run_data_test(
      std::filesystem::path(o.csv), o.has_header, o.log_ret,
      parse_lags(o.lags), grid, parse_alpha_list(o.alphas), o.mc, o.seed,
      parse_bandwidth(o.bandwidth));
  std::cout << fqa::results_to_table(results);
  if (!o.out.empty()) {
    std::string json;
    if (o.emit_cells) {
      // Re-derive the per-lag cell vectors so the report carries them.
      fqa::CurveMatrix m = fqa::load_csv(o.csv, o.has_header);
      if (o.log_ret) m = fqa::log_returns(m);
      const fqa::QuantileCurveSet qs = fqa::quantile_curves(m, grid.levels);
      const fqa::ExcursionTable table = fqa::excursion_table(m, qs);
      json = "[";
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (i > 0) json += ",";
        nlohmann::ordered_json entry = nlohmann::ordered_json::parse(
            fqa::test_result_to_json(results[i]));
        entry["cells"] = nlohmann::ordered_json::parse(fqa::fqa_vector_to_json(
            fqa::fqa_vector(table, grid, results[i].lag)));
        json += entry.dump();
      }
      json += "]";
    } else {
      json = fqa::results_to_json(results);
    }
    fqa::write_text_file(o.out, json);
    std::cout << "wrote " << o.out << '\n';
  }
  return 0;
}

fqa::ScenarioSpec make_scenario(const std::string& name, Eigen::Index T,
                                Eigen::Index p, double c, double C,
                                const std::string& noise,
                                Eigen::Index burn_in,
                                const std::string& contaminate) {
  fqa::ScenarioSpec spec;
  spec.kind = fqa::scenario_kind_from_name(name);
  spec.T = T;
  spec.p = p;
  spec.c = c;
  spec.C = C;
  spec.noise = fqa::noise_kind_from_name(noise);
  spec.burn_in = burn_in;
  if (!contaminate.empty())
    spec.contamination = parse_contaminate(contaminate);
  fqa::validate_spec(spec);
  return spec;
}

int run_simulate_cmd(const SimulateOpts& o) {
  const fqa::ScenarioSpec spec = make_scenario(
      o.scenario, o.T, o.p, o.c, o.C, o.noise, o.burn_in, o.contaminate);
  const fqa::CurveMatrix m = fqa::generate(spec, o.seed);
  fqa::save_csv(m, o.out);

  nlohmann::ordered_json meta;
  meta["scenario"] = fqa::to_string(spec.kind);
  meta["T"] = spec.T;
  meta["p"] = spec.p;
  if (spec.kind == fqa::ScenarioKind::Far1) meta["c"] = spec.c;
  if (spec.kind == fqa::ScenarioKind::Tfar1) meta["C"] = spec.C;
  if (spec.kind == fqa::ScenarioKind::Far1 ||
      spec.kind == fqa::ScenarioKind::Tfar1) {
    meta["noise"] = fqa::to_string(spec.noise);
    meta["burn_in"] = spec.burn_in;
  }
  if (spec.contamination)
    meta["contamination"] = {{"curve_frac", spec.contamination->curve_frac},
                             {"point_frac", spec.contamination->point_frac},
                             {"height", spec.contamination->height}};
  else
    meta["contamination"] = nullptr;
  meta["seed"] = o.seed;
  fqa::write_text_file(o.out + ".meta.json", meta.dump(2));

  std::cout << "wrote " << o.out << " (" << m.series_length() << "x"
            << m.grid_size() << ") and " << o.out << ".meta.json\n";
  return 0;
}

fqa::ExperimentSpec make_experiment(const StudyOpts& o) {
  fqa::ExperimentSpec spec;
  spec.scenario = make_scenario(o.scenario, o.T, o.p, o.c, o.C, o.noise,
                                o.burn_in, o.contaminate);
  spec.replicates = o.N;
  spec.alphas = parse_alpha_list(o.alphas);
  spec.lag = o.lag;
  spec.grid = FqaGrid::make_reduced(parse_prob_list(o.levels, "--levels"));
  spec.M = o.mc;
  spec.base_seed = o.seed;
  spec.parallelism = o.workers;
  spec.bandwidth = parse_bandwidth(o.bandwidth);
  if (!o.sweep.empty()) spec.sweep = parse_sweep(o.sweep);
  return spec;
}

void emit_report(const fqa::ExperimentReport& report, const std::string& out,
                 bool gnuplot) {
  std::cout << fqa::report_to_csv(report);
  if (out.empty()) return;
  fqa::write_text_file(out, fqa::report_to_csv(report));
  std::filesystem::path json_path(out);
  json_path.replace_extension(".json");
  if (json_path == std::filesystem::path(out)) json_path += ".report.json";
  fqa::write_text_file(json_path, fqa::report_to_json(report));
  std::cout << "wrote " << out << " and " << json_path.string();
  if (gnuplot) {
    std::filesystem::path plot_path(out);
    plot_path.replace_extension(".gnuplot");
    fqa::write_text_file(
        plot_path, fqa::report_to_gnuplot(report, report.spec.alphas.front()));
    std::cout << " and " << plot_path.string();
  }
  std::cout << '\n';
}

int run_size_cmd(const StudyOpts& o) {
  emit_report(fqa::run_size(make_experiment(o)), o.out, false);
  return 0;
}

int run_power_cmd(const StudyOpts& o) {
  emit_report(fqa::run_power(make_experiment(o)), o.out, true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "White-noise testing for functional time series via quantile "
      "autocorrelation of excursion sets"};
  app.require_subcommand(1);

  TestOpts test_opts;
  CLI::App* test_cmd = app.add_subcommand(
      "test", "Run the omnibus white-noise test on a CSV of curves");
  test_cmd->add_option("csv", test_opts.csv, "CSV file, one curve per row")
      ->required();
  test_cmd->add_flag("--has-header", test_opts.has_header,
                     "skip the first CSV row");
  test_cmd->add_flag("--log-returns", test_opts.log_ret,
                     "transform price curves to log-return curves first");
  test_cmd->add_option("--lags", test_opts.lags,
                       "lags to test: N, N..M, or l1,l2,... (default 1)");
  test_cmd->add_option("--alpha", test_opts.alphas,
                       "significance levels, comma separated (default 0.05)");
  test_cmd->add_option("--levels", test_opts.levels,
                       "quantile levels, start:end:step or list "
                       "(default 0.05:0.95:0.05)");
  test_cmd->add_flag("--reduced",
                     "identify thresholds with levels (the default)");
  CLI::Option* general_flag = test_cmd->add_flag(
      "--general", test_opts.general,
      "use an independent threshold grid (requires --thresholds)");
  test_cmd
      ->add_option("--thresholds", test_opts.thresholds,
                   "threshold grid for --general, start:end:step or list")
      ->needs(general_flag);
  general_flag->needs(test_cmd->get_option("--thresholds"));
  test_cmd->add_option("--mc", test_opts.mc,
                       "Monte Carlo null replicates (default 10000)");
  test_cmd->add_option("--bandwidth", test_opts.bandwidth,
                       "lag-window bandwidth: auto or integer (default auto)");
  test_cmd->add_option("--seed", test_opts.seed, "RNG seed (default 1)");
  test_cmd->add_option("--out", test_opts.out, "write a JSON report here");
  test_cmd->add_flag("--emit-cells", test_opts.emit_cells,
                     "include per-cell correlation vectors in the report");

  SimulateOpts sim_opts;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Generate a synthetic series as CSV");
  sim_cmd
      ->add_option("--scenario", sim_opts.scenario,
                   "brownian, gaussian_wn, t3_quadratic, fourier_cauchy, "
                   "far1, or tfar1")
      ->required();
  sim_cmd->add_option("--T", sim_opts.T, "series length (default 200)");
  sim_cmd->add_option("--p", sim_opts.p, "grid size (default 500)");
  sim_cmd->add_option("--c", sim_opts.c, "far1 kernel coefficient");
  sim_cmd->add_option("--C", sim_opts.C, "tfar1 coefficient bound");
  sim_cmd->add_option("--noise", sim_opts.noise,
                      "gaussian, t3, or brownian (default gaussian)");
  sim_cmd->add_option("--burn-in", sim_opts.burn_in,
                      "AR warm-up curves to discard (default 50)");
  sim_cmd->add_option("--contaminate", sim_opts.contaminate,
                      "curve_frac,point_frac,height spike contamination");
  sim_cmd->add_option("--seed", sim_opts.seed, "RNG seed (default 1)");
  sim_cmd->add_option("--out", sim_opts.out, "output CSV path")->required();

  auto add_study_options = [](CLI::App* cmd, StudyOpts& o, bool power) {
    cmd->add_option("--scenario", o.scenario, "scenario kind")->required();
    cmd->add_option("--T", o.T, "series length (default 200)");
    cmd->add_option("--p", o.p, "grid size (default 500)");
    cmd->add_option("--N", o.N, "replicates (default 500)");
    cmd->add_option("--lag", o.lag, "lag to test (default 1)");
    cmd->add_option("--alpha", o.alphas,
                    "significance levels, comma separated (default 0.05)");
    cmd->add_option("--levels", o.levels,
                    "quantile levels (default 0.05:0.95:0.05)");
    cmd->add_option("--mc", o.mc, "Monte Carlo replicates (default 10000)");
    cmd->add_option("--bandwidth", o.bandwidth,
                    "lag-window bandwidth: auto or integer (default auto)");
    cmd->add_option("--seed", o.seed, "base seed (default 1)");
    cmd->add_option("--workers", o.workers,
                    "parallel replicate workers (default 1)");
    cmd->add_option("--out", o.out, "output CSV path (JSON written beside)");
    cmd->add_option("--burn-in", o.burn_in,
                    "AR warm-up curves to discard (default 50)");
    cmd->add_option("--contaminate", o.contaminate,
                    "curve_frac,point_frac,height spike contamination");
    cmd->add_option("--noise", o.noise,
                    "AR noise: gaussian, t3, or brownian (default gaussian)");
    cmd->add_option("--c", o.c, "far1 coefficient (when not sweeping)");
    cmd->add_option("--C", o.C, "tfar1 coefficient bound (when not sweeping)");
    if (power)
      cmd->add_option("--sweep", o.sweep,
                      "parameter sweep, e.g. c=0:0.8:0.2 or C=0.2,0.8");
  };

  StudyOpts size_opts;
  CLI::App* size_cmd = app.add_subcommand(
      "size", "Empirical size study under a null scenario");
  add_study_options(size_cmd, size_opts, false);

  StudyOpts power_opts;
  CLI::App* power_cmd = app.add_subcommand(
      "power", "Empirical power study under an AR alternative");
  add_study_options(power_cmd, power_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(test_cmd)) return run_test_cmd(test_opts);
    if (app.got_subcommand(sim_cmd)) return run_simulate_cmd(sim_opts);
    if (app.got_subcommand(size_cmd)) return run_size_cmd(size_opts);
    if (app.got_subcommand(power_cmd)) return run_power_cmd(power_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
