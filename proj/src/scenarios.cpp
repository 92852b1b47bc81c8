#include "fqa/scenarios.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fqa/rng.hpp"

namespace fqa {

namespace {

void check_sizes(Eigen::Index T, Eigen::Index p, const char* who) {
  if (T < 2 || p < 2) {
    std::ostringstream msg;
    msg << who << ": need T >= 2 and p >= 2 (got T = " << T << ", p = " << p
        << ")";
    throw std::invalid_argument(msg.str());
  }
}

// Trapezoid quadrature weights on the uniform grid: spacing 1/(p-1) with
// endpoint halving.
std::vector<double> trapezoid_weights(Eigen::Index p) {
  const double step = 1.0 / static_cast<double>(p - 1);
  std::vector<double> w(static_cast<std::size_t>(p), step);
  w.front() = 0.5 * step;
  w.back() = 0.5 * step;
  return w;
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::T3: return "t3";
    case NoiseKind::Brownian: return "brownian";
  }
  throw std::logic_error("to_string: bad NoiseKind");
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Brownian: return "brownian";
    case ScenarioKind::GaussianWn: return "gaussian_wn";
    case ScenarioKind::T3Quadratic: return "t3_quadratic";
    case ScenarioKind::FourierCauchy: return "fourier_cauchy";
    case ScenarioKind::Far1: return "far1";
    case ScenarioKind::Tfar1: return "tfar1";
  }
  throw std::logic_error("to_string: bad ScenarioKind");
}

NoiseKind noise_kind_from_name(const std::string& name) {
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "t3") return NoiseKind::T3;
  if (name == "brownian") return NoiseKind::Brownian;
  throw std::invalid_argument("unknown noise kind '" + name +
                              "' (expected gaussian, t3, or brownian)");
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
  if (name == "brownian") return ScenarioKind::Brownian;
  if (name == "gaussian_wn") return ScenarioKind::GaussianWn;
  if (name == "t3_quadratic") return ScenarioKind::T3Quadratic;
  if (name == "fourier_cauchy") return ScenarioKind::FourierCauchy;
  if (name == "far1") return ScenarioKind::Far1;
  if (name == "tfar1") return ScenarioKind::Tfar1;
  throw std::invalid_argument(
      "unknown scenario '" + name +
      "' (expected brownian, gaussian_wn, t3_quadratic, fourier_cauchy, "
      "far1, or tfar1)");
}

CurveMatrix gen_brownian(Eigen::Index T, Eigen::Index p, std::uint64_t seed) {
  check_sizes(T, p, "gen_brownian");
  Rng rng(seed);
  const double sd = std::sqrt(1.0 / static_cast<double>(p - 1));
  CurveMatrix m;
  m.values.resize(T, p);
  for (Eigen::Index t = 0; t < T; ++t) {
    double level = 0.0;
    m.values(t, 0) = 0.0;
    for (Eigen::Index j = 1; j < p; ++j) {
      level += sd * rng.normal();
      m.values(t, j) = level;
    }
  }
  return m;
}

CurveMatrix gen_gaussian_wn(Eigen::Index T, Eigen::Index p,
                            std::uint64_t seed) {
  check_sizes(T, p, "gen_gaussian_wn");
  Rng rng(seed);
  CurveMatrix m;
  m.values.resize(T, p);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < p; ++j) m.values(t, j) = rng.normal();
  return m;
}

CurveMatrix gen_t3_quadratic(Eigen::Index T, Eigen::Index p,
                             std::uint64_t seed) {
  check_sizes(T, p, "gen_t3_quadratic");
  Rng rng(seed);
  const EvalGrid grid = EvalGrid::uniform(p);
  CurveMatrix m;
  m.values.resize(T, p);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < p; ++j) {
      const double u = grid.points[static_cast<std::size_t>(j)];
      m.values(t, j) = u * u + rng.student_t3();
    }
  return m;
}

CurveMatrix gen_fourier_cauchy(Eigen::Index T, Eigen::Index p,
                               std::uint64_t seed) {
  check_sizes(T, p, "gen_fourier_cauchy");
  Rng rng(seed);
  const EvalGrid grid = EvalGrid::uniform(p);

  // Basis rows: 1, cos(2*pi*k*u), sin(2*pi*k*u) for k = 1..3.  The u = 1
  // endpoint is pinned to the exact periodic values cos = 1, sin = 0, which
  // floating-point evaluation of 2*pi*k would otherwise miss by an ulp.
  Eigen::MatrixXd basis(7, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double u = grid.points[static_cast<std::size_t>(j)];
    basis(0, j) = 1.0;
    for (int k = 1; k <= 3; ++k) {
      if (j == p - 1) {
        basis(2 * k - 1, j) = 1.0;
        basis(2 * k, j) = 0.0;
      } else {
        basis(2 * k - 1, j) = std::cos(2.0 * M_PI * k * u);
        basis(2 * k, j) = std::sin(2.0 * M_PI * k * u);
      }
    }
  }

  CurveMatrix m;
  m.values.resize(T, p);
  double z[7];
  for (Eigen::Index t = 0; t < T; ++t) {
    for (double& zi : z) zi = rng.cauchy();
    for (Eigen::Index j = 0; j < p; ++j) {
      double v = 0.0;
      for (int i = 0; i < 7; ++i) v += z[i] * basis(i, j);
      m.values(t, j) = v;
    }
  }
  return m;
}

CurveMatrix gen_noise(NoiseKind kind, Eigen::Index T, Eigen::Index p,
                      std::uint64_t seed) {
  switch (kind) {
    case NoiseKind::Gaussian:
      return gen_gaussian_wn(T, p, seed);
    case NoiseKind::Brownian:
      return gen_brownian(T, p, seed);
    case NoiseKind::T3: {
      check_sizes(T, p, "gen_noise");
      Rng rng(seed);
      CurveMatrix m;
      m.values.resize(T, p);
      for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index j = 0; j < p; ++j)
          m.values(t, j) = rng.student_t3();
      return m;
    }
  }
  throw std::invalid_argument("gen_noise: unknown noise kind");
}

namespace {

// Shared AR(1) recursion.  The Gaussian kernel coeff*exp(-(u^2+v^2)/2) is
// separable, so one trapezoid sum against exp(-v^2/2) evaluates the whole
// integral operator in O(p) per step.  `pick_coeff` maps the trapezoid
// integral of the previous curve to the step's coefficient.
template <typename PickCoeff>
CurveMatrix ar1_recursion(Eigen::Index T, Eigen::Index p, NoiseKind noise,
                          std::uint64_t noise_seed, Eigen::Index burn_in,
                          PickCoeff&& pick_coeff) {
  const Eigen::Index total = burn_in + T;
  const CurveMatrix eps = gen_noise(noise, total, p, noise_seed);
  const EvalGrid grid = EvalGrid::uniform(p);
  const std::vector<double> w = trapezoid_weights(p);

  Eigen::VectorXd gauss(p);  // exp(-u^2/2) on the grid
  for (Eigen::Index j = 0; j < p; ++j) {
    const double u = grid.points[static_cast<std::size_t>(j)];
    gauss[j] = std::exp(-0.5 * u * u);
  }

  Eigen::MatrixXd x(total, p);
  x.row(0) = eps.values.row(0);
  for (Eigen::Index t = 1; t < total; ++t) {
    double integral = 0.0;  // plain trapezoid integral of the previous curve
    double weighted = 0.0;  // trapezoid sum against exp(-v^2/2)
    for (Eigen::Index v = 0; v < p; ++v) {
      const double wx = w[static_cast<std::size_t>(v)] * x(t - 1, v);
      integral += wx;
      weighted += gauss[v] * wx;
    }
    const double coeff = pick_coeff(integral);
    for (Eigen::Index j = 0; j < p; ++j)
      x(t, j) = coeff * gauss[j] * weighted + eps.values(t, j);
  }

  CurveMatrix out;
  out.values = x.bottomRows(T);
  return out;
}

}  // namespace

CurveMatrix gen_far1(Eigen::Index T, Eigen::Index p, double c,
                     NoiseKind noise, std::uint64_t seed,
                     Eigen::Index burn_in) {
  check_sizes(T, p, "gen_far1");
  if (burn_in < 0)
    throw std::invalid_argument("gen_far1: burn_in must be >= 0");
  if (!(std::abs(c) * kGaussKernelHsNorm < 1.0)) {
    std::ostringstream msg;
    msg << "gen_far1: coefficient c = " << c
        << " violates stationarity (need |c| * " << kGaussKernelHsNorm
        << " < 1)";
    throw std::invalid_argument(msg.str());
  }
  return ar1_recursion(T, p, noise, seed, burn_in,
                       [c](double) { return c; });
}

CurveMatrix gen_tfar1(Eigen::Index T, Eigen::Index p, double C,
                      NoiseKind noise, std::uint64_t seed,
                      Eigen::Index burn_in) {
  check_sizes(T, p, "gen_tfar1");
  if (burn_in < 0)
    throw std::invalid_argument("gen_tfar1: burn_in must be >= 0");
  if (!(C >= 0.0 && C < 1.0)) {
    std::ostringstream msg;
    msg << "gen_tfar1: coefficient bound C = " << C
        << " out of range [0, 1)";
    throw std::invalid_argument(msg.str());
  }
  // One regime pair per series; the noise stream is seeded independently so
  // the coefficient draw does not shift it.
  const double c1 = Rng(derive_seed(seed, 0)).uniform(0.0, C);
  const double c2 = c1 - C;
  return ar1_recursion(
      T, p, noise, derive_seed(seed, 1), burn_in,
      [c1, c2](double integral) { return integral <= 0.0 ? c1 : c2; });
}

CurveMatrix contaminate(const CurveMatrix& m, double curve_frac,
                        double point_frac, double height, std::uint64_t seed) {
  if (!(curve_frac >= 0.0 && curve_frac <= 1.0) ||
      !(point_frac >= 0.0 && point_frac <= 1.0))
    throw std::invalid_argument(
        "contaminate: fractions must lie in [0, 1]");
  const Eigen::Index T = m.series_length();
  const Eigen::Index p = m.grid_size();
  const auto n_rows = static_cast<Eigen::Index>(
      std::llround(curve_frac * static_cast<double>(T)));
  const auto n_cols = static_cast<Eigen::Index>(
      std::llround(point_frac * static_cast<double>(p)));

  CurveMatrix out = m;
  if (n_rows == 0 || n_cols == 0) return out;

  Rng rng(seed);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(T));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  // Partial Fisher-Yates: the first n_rows entries become a uniform
  // without-replacement draw.
  for (Eigen::Index i = 0; i < n_rows; ++i)
    std::swap(rows[static_cast<std::size_t>(i)],
              rows[static_cast<std::size_t>(
                  i + static_cast<Eigen::Index>(
                          rng.below(static_cast<std::uint64_t>(T - i))))]);

  std::vector<Eigen::Index> cols(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const Eigen::Index t = rows[static_cast<std::size_t>(i)];
    std::iota(cols.begin(), cols.end(), Eigen::Index{0});
    for (Eigen::Index k = 0; k < n_cols; ++k) {
      std::swap(cols[static_cast<std::size_t>(k)],
                cols[static_cast<std::size_t>(
                    k + static_cast<Eigen::Index>(
                            rng.below(static_cast<std::uint64_t>(p - k))))]);
      out.values(t, cols[static_cast<std::size_t>(k)]) += height;
    }
  }
  return out;
}

void validate_spec(const ScenarioSpec& spec) {
  check_sizes(spec.T, spec.p, "scenario");
  if (spec.burn_in < 0)
    throw std::invalid_argument("scenario: burn_in must be >= 0");
  if (spec.kind == ScenarioKind::Far1 &&
      !(std::abs(spec.c) * kGaussKernelHsNorm < 1.0))
    throw std::invalid_argument(
        "scenario: far1 coefficient violates stationarity");
  if (spec.kind == ScenarioKind::Tfar1 && !(spec.C >= 0.0 && spec.C < 1.0))
    throw std::invalid_argument(
        "scenario: tfar1 coefficient bound out of range [0, 1)");
  if (spec.contamination) {
    const Contamination& cont = *spec.contamination;
    if (!(cont.curve_frac >= 0.0 && cont.curve_frac <= 1.0) ||
        !(cont.point_frac >= 0.0 && cont.point_frac <= 1.0))
      throw std::invalid_argument(
          "scenario: contamination fractions must lie in [0, 1]");
  }
}

CurveMatrix generate(const ScenarioSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  CurveMatrix m;
  switch (spec.kind) {
    case ScenarioKind::Brownian:
      m = gen_brownian(spec.T, spec.p, seed);
      break;
    case ScenarioKind::GaussianWn:
      m = gen_gaussian_wn(spec.T, spec.p, seed);
      break;
    case ScenarioKind::T3Quadratic:
      m = gen_t3_quadratic(spec.T, spec.p, seed);
      break;
    case ScenarioKind::FourierCauchy:
      m = gen_fourier_cauchy(spec.T, spec.p, seed);
      break;
    case ScenarioKind::Far1:
      m = gen_far1(spec.T, spec.p, spec.c, spec.noise, seed, spec.burn_in);
      break;
    case ScenarioKind::Tfar1:
      m = gen_tfar1(spec.T, spec.p, spec.C, spec.noise, seed, spec.burn_in);
      break;
  }
  if (spec.contamination) {
    const Contamination& cont = *spec.contamination;
    m = contaminate(m, cont.curve_frac, cont.point_frac, cont.height,
                    derive_seed(seed, 0x434F4E54ULL));
  }
  return m;
}

}  // namespace fqa
