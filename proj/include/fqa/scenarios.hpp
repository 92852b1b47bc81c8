#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fqa/curve_matrix.hpp"

namespace fqa {

enum class NoiseKind { Gaussian, T3, Brownian };

enum class ScenarioKind {
  Brownian,       // iid standard Brownian paths
  GaussianWn,     // iid N(0,1) at every grid point (rough paths)
  T3Quadratic,    // u^2 mean plus iid Student-t(3) noise
  FourierCauchy,  // 7-term Fourier basis with iid standard Cauchy coefficients
  Far1,           // functional AR(1) with Gaussian kernel, coefficient c
  Tfar1           // threshold functional AR(1), regime coefficients c1/c2
};

std::string to_string(NoiseKind kind);
std::string to_string(ScenarioKind kind);
NoiseKind noise_kind_from_name(const std::string& name);
ScenarioKind scenario_kind_from_name(const std::string& name);

// Hilbert-Schmidt norm of the unit-coefficient Gaussian kernel
// exp(-(u^2+v^2)/2) on [0,1]^2, i.e. the integral of exp(-u^2) over [0,1].
// |c| times this must stay below 1 for the AR recursion to be stationary.
inline constexpr double kGaussKernelHsNorm = 0.746824;

// Additive spike contamination: a fraction of curves gets a fraction of its
// grid points shifted up by `height`.
struct Contamination {
  double curve_frac = 0.10;
  double point_frac = 0.10;
  double height = 10.0;
};

CurveMatrix gen_brownian(Eigen::Index T, Eigen::Index p, std::uint64_t seed);
CurveMatrix gen_gaussian_wn(Eigen::Index T, Eigen::Index p, std::uint64_t seed);
CurveMatrix gen_t3_quadratic(Eigen::Index T, Eigen::Index p, std::uint64_t seed);
CurveMatrix gen_fourier_cauchy(Eigen::Index T, Eigen::Index p,
                               std::uint64_t seed);
CurveMatrix gen_noise(NoiseKind kind, Eigen::Index T, Eigen::Index p,
                      std::uint64_t seed);

// X_t = Phi X_{t-1} + eps_t with kernel c * exp(-(u^2+v^2)/2), the integral
// discretized by the trapezoid rule on the curve grid.  The chain starts at
// a pure noise draw and the first `burn_in` curves are dropped.
CurveMatrix gen_far1(Eigen::Index T, Eigen::Index p, double c,
                     NoiseKind noise, std::uint64_t seed,
                     Eigen::Index burn_in = 50);

// Threshold variant: one coefficient c1 ~ Uniform(0, C) is drawn per series
// and c2 = c1 - C; each step applies coefficient c1 when the trapezoid
// integral of the previous curve is <= 0 and c2 otherwise.
CurveMatrix gen_tfar1(Eigen::Index T, Eigen::Index p, double C,
                      NoiseKind noise, std::uint64_t seed,
                      Eigen::Index burn_in = 50);

// Picks round(curve_frac * T) distinct rows; within each, adds `height` at
// round(point_frac * p) distinct columns redrawn per row.
CurveMatrix contaminate(const CurveMatrix& m, double curve_frac,
                        double point_frac, double height, std::uint64_t seed);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::GaussianWn;
  Eigen::Index T = 200;
  Eigen::Index p = 500;
  double c = 0.0;                  // far1 kernel coefficient
  double C = 0.0;                  // tfar1 coefficient bound
  NoiseKind noise = NoiseKind::Gaussian;
  std::optional<Contamination> contamination;
  Eigen::Index burn_in = 50;
};

// Throws std::invalid_argument when sizes, stationarity bounds, or
// contamination fractions are out of range.
void validate_spec(const ScenarioSpec& spec);

// Dispatches to the generator for spec.kind, then applies contamination
// (with a seed derived from `seed`) when configured.
CurveMatrix generate(const ScenarioSpec& spec, std::uint64_t seed);

}  // namespace fqa
