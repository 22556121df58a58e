#include "decolab/analytic_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "decolab/constants.hpp"
#include "decolab/errors.hpp"

namespace decolab {

namespace {

constexpr double kSeriesThreshold = 0.5;

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
  return v;
}

// B(u) / u^3 where B(u) = 4u + 4 e^{-2u} - e^{-4u} - 3. The Taylor
// coefficients are (4 (-2)^k - (-4)^k) / k! for k >= 3.
double bracket_over_u3(double u) {
  if (u >= kSeriesThreshold) {
    const double b = 4.0 * u + 4.0 * std::exp(-2.0 * u) - std::exp(-4.0 * u) - 3.0;
    return b / (u * u * u);
  }
  double sum = 0.0;
  double p2 = -8.0;   // (-2)^3
  double p4 = -64.0;  // (-4)^3
  double fact = 6.0;  // 3!
  double up = 1.0;    // u^(k-3)
  for (int k = 3; k < 60; ++k) {
    const double term = (4.0 * p2 - p4) / fact * up;
    sum += term;
    if (k > 6 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    p2 *= -2.0;
    p4 *= -4.0;
    fact *= static_cast<double>(k + 1);
    up *= u;
  }
  return sum;
}

double magnitude(const ExperimentConfig& cfg, int j) { return cfg.amplitudes.magnitudes[static_cast<std::size_t>(j - 1)]; }
double theta(const ExperimentConfig& cfg, int j) { return cfg.amplitudes.phases[static_cast<std::size_t>(j - 1)]; }

void check_inputs(double t, const Bath& bath) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("t must be finite and >= 0");
  if (!(bath.gamma_per_s >= 0.0) || !std::isfinite(bath.gamma_per_s)) throw InvalidParameter("gamma must be >= 0");
  if (!(bath.diffusion >= 0.0) || !std::isfinite(bath.diffusion)) throw InvalidParameter("D must be >= 0");
}

}  // namespace

std::string_view to_string(EvaluationMode mode) {
  switch (mode) {
    case EvaluationMode::exact: return "exact";
    case EvaluationMode::farfield: return "farfield";
    case EvaluationMode::no_decoherence: return "nodecoherence";
  }
  return "unknown";
}

EvaluationMode parse_evaluation_mode(std::string_view text) {
  if (text == "exact") return EvaluationMode::exact;
  if (text == "farfield") return EvaluationMode::farfield;
  if (text == "nodecoherence") return EvaluationMode::no_decoherence;
  throw InvalidParameter("unknown mode '" + std::string(text) + "' (expected exact|farfield|nodecoherence)");
}

double IntensityProfile::max() const {
  return intensity.empty() ? 0.0 : *std::max_element(intensity.begin(), intensity.end());
}

double IntensityTerms::cross() const {
  double s = 0.0;
  for (const auto& p : pairs) s += p.value;
  return s;
}

// ---------------------------------------------------------------------------

double spreading_time(double gamma_per_s, double t) {
  if (gamma_per_s == 0.0) return 2.0 * t;
  return -std::expm1(-2.0 * gamma_per_s * t) / gamma_per_s;
}

double diffusion_bracket(double gamma_per_s, double t) {
  const double u = gamma_per_s * t;
  return t * t * t * bracket_over_u3(u);
}

double alpha(double t, double eps_m, double mass_kg, double gamma_per_s, double diffusion) {
  if (!(eps_m > 0.0) || !(mass_kg > 0.0)) throw InvalidParameter("alpha requires eps > 0 and m > 0");
  check_inputs(t, {gamma_per_s, diffusion});
  const double spread = constants::hbar * spreading_time(gamma_per_s, t) / (eps_m * mass_kg);
  const double diff = diffusion * diffusion_bracket(gamma_per_s, t) / (8.0 * mass_kg * mass_kg);
  return checked(eps_m * eps_m + spread * spread + diff, "alpha");
}

double f_jk(double x, int j, int k, double t, const ExperimentConfig& cfg, const Bath& bath) {
  check_inputs(t, bath);
  const double l = cfg.slits.spacing_m;
  const double eps = cfg.slits.width_m;
  const double m = cfg.quanton.mass_kg;
  const double dj = x - j * l;
  const double dk = x - k * l;
  const double sep = l * (j - k);
  const double extra = sep * sep * bath.diffusion * diffusion_bracket(bath.gamma_per_s, t) / (16.0 * eps * eps * m * m);
  return checked(dj * dj + dk * dk + extra, "f_jk");
}

double phase_argument(double x, int j, int k, double t, const ExperimentConfig& cfg, const Bath& bath) {
  const double l = cfg.slits.spacing_m;
  const double eps = cfg.slits.width_m;
  const double m = cfg.quanton.mass_kg;
  const double a = alpha(t, eps, m, bath.gamma_per_s, bath.diffusion);
  const double arg = 2.0 * constants::hbar * spreading_time(bath.gamma_per_s, t) * l * (k - j) *
                     (x - l * (k + j) / 2.0) / (a * m * eps * eps);
  return checked(arg + theta(cfg, k) - theta(cfg, j), "phase argument");
}

double farfield_phase(double x, int j, int k, const ExperimentConfig& cfg) {
  const double l = cfg.slits.spacing_m;
  return 2.0 * std::numbers::pi * l * (k - j) * (x - l * (k + j) / 2.0) / cfg.lambda_L() + theta(cfg, k) -
         theta(cfg, j);
}

double pair_decay_factor(int j, int k, double t, const ExperimentConfig& cfg, const Bath& bath) {
  const double sep = cfg.slits.spacing_m * (j - k);
  const double hb2 = constants::hbar * constants::hbar;
  return std::exp(-bath.diffusion * sep * sep * t / (12.0 * hb2));
}

// ---------------------------------------------------------------------------

IntensityTerms intensity_terms(double x, double t, const ExperimentConfig& cfg, const Bath& bath,
                               EvaluationMode mode) {
  check_inputs(t, bath);
  const int n = cfg.slit_count();
  const double l = cfg.slits.spacing_m;
  const double eps = cfg.slits.width_m;
  const double m = cfg.quanton.mass_kg;
  const auto& O = cfg.detector.overlaps;

  IntensityTerms out;
  out.pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));

  if (mode == EvaluationMode::exact) {
    const double a = alpha(t, eps, m, bath.gamma_per_s, bath.diffusion);
    out.prefactor = 1.0 / std::sqrt(std::numbers::pi * a / 2.0);
    double inc = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double d = x - j * l;
      const double c = magnitude(cfg, j);
      inc += c * c * std::exp(-2.0 * d * d / a);
    }
    out.incoherent = out.prefactor * inc;
    for (int j = 1; j <= n; ++j) {
      for (int k = j + 1; k <= n; ++k) {
        const double w = magnitude(cfg, j) * magnitude(cfg, k);
        const double ojk = std::abs(O(j - 1, k - 1));
        const double okj = std::abs(O(k - 1, j - 1));
        const double forward = w * ojk * std::exp(-f_jk(x, j, k, t, cfg, bath) / a) *
                               std::cos(phase_argument(x, j, k, t, cfg, bath));
        const double backward = w * okj * std::exp(-f_jk(x, k, j, t, cfg, bath) / a) *
                                std::cos(phase_argument(x, k, j, t, cfg, bath));
        out.pairs.push_back({j, k, out.prefactor * (forward + backward)});
      }
    }
    return out;
  }

  require_far_field(cfg);
  const Bath effective = mode == EvaluationMode::farfield ? bath : Bath{0.0, 0.0};
  const double a = alpha(t, eps, m, effective.gamma_per_s, effective.diffusion);
  out.prefactor = 1.0 / std::sqrt(std::numbers::pi * a / 2.0);
  // Envelope exp(-2 eps^2 (x - j l)^2 / (lambda L / pi)^2).
  const double far = cfg.lambda_L() / std::numbers::pi;
  const double scale = eps * eps / (far * far);
  double inc = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double d = x - j * l;
    const double c = magnitude(cfg, j);
    inc += c * c * std::exp(-2.0 * scale * d * d);
  }
  out.incoherent = out.prefactor * inc;
  for (int j = 1; j <= n; ++j) {
    for (int k = j + 1; k <= n; ++k) {
      const double w = magnitude(cfg, j) * magnitude(cfg, k);
      const double dj = x - j * l;
      const double dk = x - k * l;
      const double env = std::exp(-scale * (dj * dj + dk * dk));
      const double decay = pair_decay_factor(j, k, t, cfg, effective);
      const double forward = w * std::abs(O(j - 1, k - 1)) * env * decay * std::cos(farfield_phase(x, j, k, cfg));
      const double backward = w * std::abs(O(k - 1, j - 1)) * env * decay * std::cos(farfield_phase(x, k, j, cfg));
      out.pairs.push_back({j, k, out.prefactor * (forward + backward)});
    }
  }
  return out;
}

double intensity(double x, double t, const ExperimentConfig& cfg, const Bath& bath, EvaluationMode mode) {
  return intensity_terms(x, t, cfg, bath, mode).total();
}

double intensity(double x, double t, const ExperimentConfig& cfg, EvaluationMode mode) {
  return intensity(x, t, cfg, bath_from_environment(cfg), mode);
}

IntensityProfile pattern(const ExperimentConfig& cfg, double t, const Bath& bath, EvaluationMode mode,
                         std::span<const double> grid, Normalization norm) {
  require_valid(cfg);
  if (grid.empty()) throw InvalidParameter("pattern grid is empty");
  IntensityProfile p;
  p.t = t;
  p.x.assign(grid.begin(), grid.end());
  p.intensity.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) p.intensity[i] = intensity(grid[i], t, cfg, bath, mode);
  p.normalization = norm;
  if (norm == Normalization::peak_normalized) {
    double peak = 0.0;
    const Bath none{0.0, 0.0};
    for (double x : grid) peak = std::max(peak, intensity(x, t, cfg, none, mode));
    if (!(peak > 0.0)) throw NumericalError("reference pattern has no positive peak on the grid");
    p.reference_peak = peak;
    for (double& v : p.intensity) v /= peak;
  }
  return p;
}

IntensityProfile pattern_at_kappa(const ExperimentConfig& cfg, double kappa, EvaluationMode mode,
                                  Normalization norm) {
  const double t = flight_time(cfg);
  const auto grid = cfg.screen.grid();
  return pattern(cfg, t, bath_for_kappa(cfg, kappa, t), mode, grid, norm);
}

}  // namespace decolab
