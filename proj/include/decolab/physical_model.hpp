#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "decolab/constants.hpp"

namespace decolab {

// ---------------------------------------------------------------------------
// Experiment description (SI at the boundary)
// ---------------------------------------------------------------------------

struct QuantonSpec {
  double mass_kg = 0.0;
  double wavelength_m = 0.0;  ///< de Broglie wavelength
};

/// n slits, slit j (1-based) centred at x = j * spacing.
struct SlitArray {
  int count = 0;
  double spacing_m = 0.0;
  double width_m = 0.0;  ///< Gaussian width epsilon of each slit state

  double position(int j) const { return j * spacing_m; }
  /// Symmetry point of the slit array, spacing * (n + 1) / 2.
  double center() const { return spacing_m * (count + 1) / 2.0; }
};

/// Source weights c_j = |c_j| exp(-i theta_j). The sign of the phase is
/// chosen so that the position-space initial state and the closed-form
/// screen intensity share one convention (cos(... + theta_k - theta_j)).
struct SourceAmplitudes {
  std::vector<double> magnitudes;
  std::vector<double> phases;  ///< radians, same length as magnitudes

  static SourceAmplitudes equal(int n);

  std::size_t size() const { return magnitudes.size(); }
  std::complex<double> coefficient(std::size_t index) const {
    return std::polar(magnitudes[index], -phases[index]);
  }
  double norm_squared() const;
  bool zero_phases() const;
};

enum class DetectorMode { parallel, orthogonal, matrix };

/// Real Gram matrix of the which-way detector states, O_jk = <d_j|d_k>.
struct DetectorOverlaps {
  DetectorMode mode = DetectorMode::parallel;
  Eigen::MatrixXd overlaps;

  static DetectorOverlaps parallel(int n);
  static DetectorOverlaps orthogonal(int n);
  static DetectorOverlaps from_matrix(Eigen::MatrixXd m);
};

std::string_view to_string(DetectorMode mode);
DetectorMode parse_detector_mode(std::string_view text);

struct EnvironmentSpec {
  double gamma_per_s = 0.0;    ///< Langevin friction coefficient
  double temperature_K = 0.0;
};

struct ScreenGeometry {
  double distance_m = 0.0;  ///< slit-to-screen distance L
  double x_min_m = 0.0;
  double x_max_m = 0.0;
  std::size_t points = 0;

  std::vector<double> grid() const;
  double spacing() const { return (x_max_m - x_min_m) / static_cast<double>(points - 1); }
};

struct ExperimentConfig {
  QuantonSpec quanton;
  SlitArray slits;
  SourceAmplitudes amplitudes;
  DetectorOverlaps detector;
  EnvironmentSpec environment;
  ScreenGeometry screen;

  int slit_count() const { return slits.count; }
  /// lambda * L, the far-field length scale squared.
  double lambda_L() const { return quanton.wavelength_m * screen.distance_m; }
};

/// Same experiment with a different detector setting.
ExperimentConfig with_detector(ExperimentConfig cfg, DetectorMode mode);

/// Same experiment with n slits: equal amplitudes, zero phases, parallel
/// detectors unless the current detector mode is orthogonal.
ExperimentConfig with_slit_count(ExperimentConfig cfg, int n);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity { warning, error };

struct Violation {
  std::string field;
  std::string message;
  Severity severity = Severity::error;
  bool far_field_only = false;  ///< blocks far-field operations only
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  bool has_errors() const;
  const Violation* first_error() const;
};

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kFraunhoferWarning = 0.01;
inline constexpr double kFraunhoferError = 0.1;

/// Far-field figure of merit pi * eps^2 / (lambda L).
double fraunhofer_number(const ExperimentConfig& cfg);

ValidationReport validate(const ExperimentConfig& cfg);

/// Throws InvalidParameter describing the first error-severity violation that
/// is not restricted to far-field operations.
void require_valid(const ExperimentConfig& cfg);

/// Throws InvalidParameter when the far-field formulas are not applicable.
void require_far_field(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Derived physical quantities
// ---------------------------------------------------------------------------

/// D = 2 m gamma k_B T [kg^2 m^2 / s^3].
double diffusion_coefficient(double mass_kg, double gamma_per_s, double temperature_K);

/// Slit-to-screen transit time lambda L m / h.
double flight_time(double wavelength_m, double distance_m, double mass_kg);
double flight_time(const ExperimentConfig& cfg);

/// Coupling to the oscillator bath as seen by the quanton: friction and the
/// decoherence (momentum-diffusion) coefficient. D is kept independent of
/// gamma so that t / tau_d can be set directly.
struct Bath {
  double gamma_per_s = 0.0;
  double diffusion = 0.0;
};

/// gamma from the config, D = 2 m gamma k_B T.
Bath bath_from_environment(const ExperimentConfig& cfg);

/// Bath whose decoherence strength at time t is t / tau_d = kappa.
Bath bath_for_kappa(const ExperimentConfig& cfg, double kappa, double t, double gamma_per_s = 0.0);

/// Two-slit decoherence time 12 hbar^2 / (D l^2); +inf when D = 0.
double decoherence_time(const ExperimentConfig& cfg, const Bath& bath);

// ---------------------------------------------------------------------------
// Dimensionless reduction
// ---------------------------------------------------------------------------

/// Length unit is the slit spacing, time unit the flight time.
struct DimensionlessInstance {
  double length_unit = 0.0;     ///< l [m]
  double time_unit = 0.0;       ///< flight time [s]
  double eps_hat = 0.0;         ///< eps / l
  double phi = 0.0;             ///< 2 pi l^2 / (lambda L)
  double gamma_hat = 0.0;       ///< gamma * t_flight
  double decoherence_rate = 0.0;///< t_flight / tau_d
  double t_hat = 0.0;           ///< t / t_flight

  /// kappa = t / tau_d.
  double kappa() const { return t_hat * decoherence_rate; }
  double x_hat(double x_m) const { return x_m / length_unit; }
  double x_m(double x_hat) const { return x_hat * length_unit; }
};

DimensionlessInstance nondimensionalize(const ExperimentConfig& cfg, const Bath& bath, double t);
DimensionlessInstance nondimensionalize(const ExperimentConfig& cfg, double t);

/// SI quantities recoverable from a dimensionless instance.
struct PhysicalScales {
  double spacing_m = 0.0;
  double width_m = 0.0;
  double lambda_L = 0.0;
  double flight_time_s = 0.0;
  double t_s = 0.0;
  double gamma_per_s = 0.0;
  double diffusion = 0.0;
};

PhysicalScales redimensionalize(const DimensionlessInstance& inst);

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names();

/// Neon and C60 parameter sets, screen centred on the pattern with a window
/// of several fringes. Unknown names throw InvalidParameter.
ExperimentConfig load_preset(std::string_view name, int slits = 4);

}  // namespace decolab
