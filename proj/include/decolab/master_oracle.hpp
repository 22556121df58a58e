#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "decolab/analytic_engine.hpp"
#include "decolab/physical_model.hpp"

namespace decolab {

/// rho(x, x') on a periodic N x N grid in units of the slit spacing.
/// values are row-major: index i * n + j holds rho(x_i, x'_j).
struct DensityGrid {
  std::size_t n = 0;
  double x0 = 0.0;  ///< first grid point
  double dx = 0.0;
  double t = 0.0;   ///< in units of the flight time
  std::vector<std::complex<double>> values;

  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  std::complex<double>& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
  const std::complex<double>& operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }

  /// dx * sum_i rho(x_i, x_i); real part.
  double trace() const;
  /// max |rho(x,x') - conj(rho(x',x))| / max |rho|.
  double hermiticity_error() const;
  double max_abs() const;
};

struct SolverParams {
  std::size_t N = 512;
  double center = 1.5;
  double half_width = 4.8;
  double dt = 1e-3;
  int friction_substeps = 1;
  // Test hooks: switch individual generators off.
  bool enable_kinetic = true;
  bool enable_friction = true;
  bool enable_decoherence = true;

  double dx() const { return 2.0 * half_width / static_cast<double>(N); }
  double x0() const { return center - half_width; }
};

/// Dimensionless coefficients of the master equation.
struct OracleEnvironment {
  double phi = 1.0;               ///< 2 pi l^2 / (lambda L); kinetic term is 1/phi
  double gamma_hat = 0.0;         ///< gamma * t_flight
  double decoherence_rate = 0.0;  ///< t_flight / tau_d

  static OracleEnvironment from(const DimensionlessInstance& inst);
};

/// Samples the initial slit superposition with the detector traced out and
/// rescales so the discrete trace is 1. Throws InvalidParameter when dx does
/// not resolve eps (8 points per eps) or the far-field fringe period.
DensityGrid init_density(const ExperimentConfig& cfg, const SolverParams& params);
DensityGrid init_density(const ExperimentConfig& cfg, DetectorMode mode, const SolverParams& params);

/// Half-width that keeps the wrapped mass below ~1e-8 at t_hat: outermost slit
/// offset from the array centre plus three screen widths sqrt(alpha_hat).
double required_half_width(const ExperimentConfig& cfg, const Bath& bath, double t_s);

/// Strang splitting D/2 F/2 K F/2 D/2 with cached FFTW plans and multipliers.
/// One instance per evolving grid; not shareable across threads.
class Propagator {
public:
  Propagator(const SolverParams& params, const OracleEnvironment& env);
  ~Propagator();
  Propagator(const Propagator&) = delete;
  Propagator& operator=(const Propagator&) = delete;

  void step(DensityGrid& grid, double dt);
  /// `steps` steps of size dt with adjacent position-space halves merged.
  /// Throws NumericalError naming the first step with a non-finite trace.
  void advance(DensityGrid& grid, double dt, std::size_t steps);
  double dt() const { return dt_; }

private:
  void step_checks(const DensityGrid& grid, double dt) const;

  struct Impl;
  std::unique_ptr<Impl> impl_;
  double dt_ = 0.0;
};

/// One step of size dt (builds a fresh Propagator).
void step(DensityGrid& grid, double dt, const SolverParams& params, const OracleEnvironment& env);

struct EvolutionReport {
  std::size_t steps = 0;
  double dt_used = 0.0;
  double trace_initial = 0.0;
  double trace_final = 0.0;
  double trace_drift = 0.0;          ///< |final - initial|
  double hermiticity_error = 0.0;    ///< relative, see DensityGrid
  double min_diagonal_relative = 0.0;///< min Re rho(x,x) / max Re rho(x,x)
  double boundary_mass = 0.0;        ///< diagonal mass in the outer 1/16 per side
  bool within_accuracy_cap = true;   ///< dt <= 1e-3 * t_final
};

using StepObserver = std::function<void(const DensityGrid&, std::size_t step)>;

/// Advances grid to t_final with a fixed step no larger than params.dt
/// (the interval is split evenly). Throws NumericalError naming the step on
/// non-finite values and InvalidParameter when the friction CFL bound fails.
EvolutionReport evolve(DensityGrid& grid, double t_final, const SolverParams& params,
                       const OracleEnvironment& env, const StepObserver& observer = {});

/// Re rho(x, x) on the grid (x in units of the slit spacing), raw.
IntensityProfile diagonal(const DensityGrid& grid);
/// max |Im rho(x,x)| / max |Re rho(x,x)|.
double diagonal_imaginary_ratio(const DensityGrid& grid);

struct ComparisonReport {
  double relative_l2 = 0.0;
  double sup = 0.0;  ///< max difference of the peak-normalized profiles
  double tolerance = 0.0;
  bool passed = false;
};

/// Compares diagonal(grid) with the exact closed form for cfg/bath at t_s, both
/// normalized to their own maximum. The grid is read in units of cfg's spacing.
ComparisonReport compare_to_analytic(const DensityGrid& grid, const ExperimentConfig& cfg, const Bath& bath,
                                     double t_s, double tolerance = 1e-2);

/// SI experiment reproducing a given dimensionless instance, for driving the
/// oracle and the closed forms from the same numbers.
struct OracleSetup {
  ExperimentConfig cfg;
  Bath bath;
  double t_final_s = 0.0;
  OracleEnvironment env;
};

OracleSetup make_oracle_setup(int slits, double eps_hat, double phi, double gamma_hat, double kappa,
                              DetectorMode mode = DetectorMode::parallel);

/// Binary checkpoint: "DGRD", u32 version, u32 N, f64 dx, f64 t, then N^2
/// (re, im) f64 pairs row-major, all little-endian. x0 is not stored.
void write_checkpoint(const DensityGrid& grid, const std::filesystem::path& path);
DensityGrid read_checkpoint(const std::filesystem::path& path, double x0 = 0.0);

}  // namespace decolab
