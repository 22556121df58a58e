#include "decolab/physical_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "decolab/errors.hpp"

namespace decolab {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw InvalidParameter(std::string(name) + " must be finite");
  }
}

}  // namespace

SourceAmplitudes SourceAmplitudes::equal(int n) {
  SourceAmplitudes a;
  a.magnitudes.assign(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  a.phases.assign(static_cast<std::size_t>(n), 0.0);
  return a;
}

double SourceAmplitudes::norm_squared() const {
  double s = 0.0;
  for (double m : magnitudes) s += m * m;
  return s;
}

bool SourceAmplitudes::zero_phases() const {
  return std::all_of(phases.begin(), phases.end(), [](double p) { return p == 0.0; });
}

DetectorOverlaps DetectorOverlaps::parallel(int n) {
  return {DetectorMode::parallel, Eigen::MatrixXd::Ones(n, n)};
}

DetectorOverlaps DetectorOverlaps::orthogonal(int n) {
  return {DetectorMode::orthogonal, Eigen::MatrixXd::Identity(n, n)};
}

DetectorOverlaps DetectorOverlaps::from_matrix(Eigen::MatrixXd m) {
  return {DetectorMode::matrix, std::move(m)};
}

std::string_view to_string(DetectorMode mode) {
  switch (mode) {
    case DetectorMode::parallel: return "parallel";
    case DetectorMode::orthogonal: return "orthogonal";
    case DetectorMode::matrix: return "matrix";
  }
  return "unknown";
}

DetectorMode parse_detector_mode(std::string_view text) {
  if (text == "parallel") return DetectorMode::parallel;
  if (text == "orthogonal") return DetectorMode::orthogonal;
  if (text == "matrix") return DetectorMode::matrix;
  throw InvalidParameter("unknown detector mode '" + std::string(text) +
                         "' (expected parallel|orthogonal|matrix)");
}

std::vector<double> ScreenGeometry::grid() const {
  std::vector<double> x(points);
  const double dx = spacing();
  for (std::size_t i = 0; i < points; ++i) x[i] = x_min_m + static_cast<double>(i) * dx;
  if (points > 1) x.back() = x_max_m;
  return x;
}

ExperimentConfig with_detector(ExperimentConfig cfg, DetectorMode mode) {
  switch (mode) {
    case DetectorMode::parallel: cfg.detector = DetectorOverlaps::parallel(cfg.slits.count); break;
    case DetectorMode::orthogonal: cfg.detector = DetectorOverlaps::orthogonal(cfg.slits.count); break;
    case DetectorMode::matrix: break;
  }
  return cfg;
}

ExperimentConfig with_slit_count(ExperimentConfig cfg, int n) {
  if (n < 1) throw InvalidParameter("slit count must be >= 1");
  const DetectorMode mode = cfg.detector.mode == DetectorMode::orthogonal ? DetectorMode::orthogonal
                                                                           : DetectorMode::parallel;
  const double half_width = 0.5 * (cfg.screen.x_max_m - cfg.screen.x_min_m);
  const double old_center = 0.5 * (cfg.screen.x_max_m + cfg.screen.x_min_m);
  const double shift = old_center - cfg.slits.center();
  cfg.slits.count = n;
  cfg.amplitudes = SourceAmplitudes::equal(n);
  cfg = with_detector(std::move(cfg), mode);
  const double center = cfg.slits.center() + shift;
  cfg.screen.x_min_m = center - half_width;
  cfg.screen.x_max_m = center + half_width;
  return cfg;
}

// ---------------------------------------------------------------------------

bool ValidationReport::has_errors() const { return first_error() != nullptr; }

const Violation* ValidationReport::first_error() const {
  for (const auto& v : violations) {
    if (v.severity == Severity::error) return &v;
  }
  return nullptr;
}

double fraunhofer_number(const ExperimentConfig& cfg) {
  const double eps = cfg.slits.width_m;
  return std::numbers::pi * eps * eps / cfg.lambda_L();
}

ValidationReport validate(const ExperimentConfig& cfg) {
  ValidationReport report;
  auto add = [&](std::string field, std::string message, Severity sev = Severity::error) {
    report.violations.push_back({std::move(field), std::move(message), sev});
  };

  if (!finite_positive(cfg.quanton.mass_kg)) add("quanton.mass_kg", "mass must be > 0");
  if (!finite_positive(cfg.quanton.wavelength_m)) add("quanton.lambda_m", "wavelength must be > 0");

  const int n = cfg.slits.count;
  if (n < 1) add("slits.n", "slit count must be >= 1");
  if (!finite_positive(cfg.slits.spacing_m)) add("slits.spacing_m", "slit spacing must be > 0");
  if (!finite_positive(cfg.slits.width_m)) add("slits.width_m", "slit width must be > 0");

  const auto& amp = cfg.amplitudes;
  const auto un = static_cast<std::size_t>(std::max(n, 0));
  if (amp.magnitudes.size() != un) {
    add("amplitudes.c", "expected " + std::to_string(n) + " magnitudes, got " +
                            std::to_string(amp.magnitudes.size()));
  } else {
    bool ok = true;
    for (double m : amp.magnitudes) {
      if (!finite_nonnegative(m)) ok = false;
    }
    if (!ok) {
      add("amplitudes.c", "magnitudes must be finite and >= 0");
    } else if (std::abs(amp.norm_squared() - 1.0) > kNormalizationTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "amplitude normalization: sum |c_j|^2 = " << amp.norm_squared() << " != 1";
      add("amplitudes.c", os.str());
    }
  }
  if (amp.phases.size() != amp.magnitudes.size()) {
    add("amplitudes.theta", "phase count must match magnitude count");
  } else if (!std::all_of(amp.phases.begin(), amp.phases.end(), [](double p) { return std::isfinite(p); })) {
    add("amplitudes.theta", "phases must be finite");
  }

  const auto& O = cfg.detector.overlaps;
  if (O.rows() != n || O.cols() != n) {
    add("detector.matrix", "overlap matrix must be n x n");
  } else if (n >= 1) {
    constexpr double tol = 1e-12;
    bool diag = true, sym = true, range = true;
    for (int j = 0; j < n; ++j) {
      if (!(std::abs(O(j, j) - 1.0) <= tol)) diag = false;
      for (int k = 0; k < n; ++k) {
        if (!(std::abs(O(j, k) - O(k, j)) <= tol)) sym = false;
        if (!(O(j, k) >= -tol && O(j, k) <= 1.0 + tol)) range = false;
      }
    }
    if (!diag) add("detector.matrix", "detector states must be normalized (O_jj = 1)");
    if (!sym) add("detector.matrix", "overlap matrix must be symmetric");
    if (!range) add("detector.matrix", "overlaps must lie in [0, 1]");
    if (diag && sym && range) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(O, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-10) {
        add("detector.matrix", "overlap matrix must be positive semidefinite (Gram matrix)");
      }
    }
  }

  if (!finite_nonnegative(cfg.environment.gamma_per_s)) add("env.gamma_per_s", "gamma must be >= 0");
  if (!finite_nonnegative(cfg.environment.temperature_K)) add("env.T_K", "temperature must be >= 0");

  const auto& s = cfg.screen;
  if (!finite_positive(s.distance_m)) add("screen.L_m", "screen distance must be > 0");
  if (!(std::isfinite(s.x_min_m) && std::isfinite(s.x_max_m) && s.x_min_m < s.x_max_m)) {
    add("screen.xmin_m", "screen window requires xmin < xmax");
  }
  if (s.points < 2) add("screen.points", "screen needs at least 2 points");

  if (finite_positive(cfg.slits.width_m) && finite_positive(cfg.quanton.wavelength_m) &&
      finite_positive(s.distance_m)) {
    const double f = fraunhofer_number(cfg);
    if (f > kFraunhoferWarning) {
      std::ostringstream os;
      os << "Fraunhofer condition violated: pi eps^2/(lambda L) = " << f;
      add("slits.width_m", os.str(), f > kFraunhoferError ? Severity::error : Severity::warning);
      report.violations.back().far_field_only = true;
    }
  }
  return report;
}

void require_valid(const ExperimentConfig& cfg) {
  const auto report = validate(cfg);
  for (const auto& v : report.violations) {
    if (v.severity == Severity::error && !v.far_field_only) throw InvalidParameter(v.field + ": " + v.message);
  }
}

void require_far_field(const ExperimentConfig& cfg) {
  const double f = fraunhofer_number(cfg);
  if (!(f <= kFraunhoferError)) {
    std::ostringstream os;
    os << "far-field evaluation requires pi eps^2/(lambda L) <= " << kFraunhoferError << ", got " << f;
    throw InvalidParameter(os.str());
  }
}

// ---------------------------------------------------------------------------

double diffusion_coefficient(double mass_kg, double gamma_per_s, double temperature_K) {
  require_finite(mass_kg, "mass");
  require_finite(gamma_per_s, "gamma");
  require_finite(temperature_K, "temperature");
  if (mass_kg <= 0.0) throw InvalidParameter("mass must be > 0");
  if (gamma_per_s < 0.0) throw InvalidParameter("gamma must be >= 0");
  if (temperature_K < 0.0) throw InvalidParameter("temperature must be >= 0");
  return 2.0 * mass_kg * gamma_per_s * constants::k_B * temperature_K;
}

double flight_time(double wavelength_m, double distance_m, double mass_kg) {
  if (!(wavelength_m > 0.0) || !(mass_kg > 0.0) || !(distance_m >= 0.0) ||
      !std::isfinite(wavelength_m * distance_m * mass_kg)) {
    throw InvalidParameter("flight_time requires lambda > 0, m > 0, L >= 0");
  }
  return wavelength_m * distance_m * mass_kg / constants::h;
}

double flight_time(const ExperimentConfig& cfg) {
  return flight_time(cfg.quanton.wavelength_m, cfg.screen.distance_m, cfg.quanton.mass_kg);
}

Bath bath_from_environment(const ExperimentConfig& cfg) {
  return {cfg.environment.gamma_per_s,
          diffusion_coefficient(cfg.quanton.mass_kg, cfg.environment.gamma_per_s,
                                cfg.environment.temperature_K)};
}

Bath bath_for_kappa(const ExperimentConfig& cfg, double kappa, double t, double gamma_per_s) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidParameter("kappa must be finite and >= 0");
  if (!(gamma_per_s >= 0.0) || !std::isfinite(gamma_per_s)) throw InvalidParameter("gamma must be >= 0");
  if (kappa == 0.0) return {gamma_per_s, 0.0};
  if (!(t > 0.0)) throw InvalidParameter("kappa > 0 requires t > 0");
  const double l = cfg.slits.spacing_m;
  return {gamma_per_s, 12.0 * constants::hbar * constants::hbar * kappa / (l * l * t)};
}

double decoherence_time(const ExperimentConfig& cfg, const Bath& bath) {
  const double l = cfg.slits.spacing_m;
  if (bath.diffusion <= 0.0) return std::numeric_limits<double>::infinity();
  return 12.0 * constants::hbar * constants::hbar / (bath.diffusion * l * l);
}

// ---------------------------------------------------------------------------

DimensionlessInstance nondimensionalize(const ExperimentConfig& cfg, const Bath& bath, double t) {
  require_valid(cfg);
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("t must be finite and >= 0");
  if (!(bath.gamma_per_s >= 0.0) || !(bath.diffusion >= 0.0)) throw InvalidParameter("bath parameters must be >= 0");
  DimensionlessInstance inst;
  const double l = cfg.slits.spacing_m;
  inst.length_unit = l;
  inst.time_unit = flight_time(cfg);
  inst.eps_hat = cfg.slits.width_m / l;
  inst.phi = 2.0 * std::numbers::pi * l * l / cfg.lambda_L();
  inst.gamma_hat = bath.gamma_per_s * inst.time_unit;
  inst.decoherence_rate =
      bath.diffusion * l * l * inst.time_unit / (12.0 * constants::hbar * constants::hbar);
  inst.t_hat = t / inst.time_unit;
  return inst;
}

DimensionlessInstance nondimensionalize(const ExperimentConfig& cfg, double t) {
  return nondimensionalize(cfg, bath_from_environment(cfg), t);
}

PhysicalScales redimensionalize(const DimensionlessInstance& inst) {
  PhysicalScales s;
  const double l = inst.length_unit;
  s.spacing_m = l;
  s.width_m = inst.eps_hat * l;
  s.lambda_L = 2.0 * std::numbers::pi * l * l / inst.phi;
  s.flight_time_s = inst.time_unit;
  s.t_s = inst.t_hat * inst.time_unit;
  s.gamma_per_s = inst.gamma_hat / inst.time_unit;
  s.diffusion = 12.0 * constants::hbar * constants::hbar * inst.decoherence_rate / (l * l * inst.time_unit);
  return s;
}

// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() { return {"neon", "c60"}; }

namespace {

ExperimentConfig make_preset(double mass, double temperature, double lambda, double spacing, double distance,
                             double width, double half_window, int n) {
  ExperimentConfig cfg;
  cfg.quanton = {mass, lambda};
  cfg.slits = {n, spacing, width};
  cfg.amplitudes = SourceAmplitudes::equal(n);
  cfg.detector = DetectorOverlaps::parallel(n);
  cfg.environment = {0.0, temperature};
  const double c = cfg.slits.center();
  cfg.screen = {distance, c - half_window, c + half_window, 2001};
  return cfg;
}

}  // namespace

ExperimentConfig load_preset(std::string_view name, int slits) {
  if (slits < 1) throw InvalidParameter("slit count must be >= 1");
  // Window: +-3.15 fringes (neon, 111 um fringes) and +-3.2 fringes (c60, 31.25 um).
  if (name == "neon") return make_preset(3.349e-26, 2.5e-3, 0.018e-6, 6e-6, 37e-3, 1e-6, 350e-6, slits);
  if (name == "c60") return make_preset(1.2e-24, 900.0, 0.0025e-9, 100e-9, 1.25, 20e-9, 100e-6, slits);
  std::string msg = "unknown preset '" + std::string(name) + "'; available:";
  for (const auto& p : preset_names()) msg += " " + p;
  throw InvalidParameter(msg);
}

}  // namespace decolab
