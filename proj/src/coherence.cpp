#include "decolab/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "decolab/constants.hpp"
#include "decolab/errors.hpp"

namespace decolab {

namespace {

constexpr double kMatrixTolerance = 1e-12;

void require_two_slits(int n) {
  if (n < 2) throw InvalidParameter("coherence is undefined for a single slit (n - 1 = 0)");
}

}  // namespace

SlitBasisDensityMatrix::SlitBasisDensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) throw InvalidParameter("density matrix must be square");
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kMatrixTolerance)) throw InvalidParameter("density matrix is not Hermitian");
  const std::complex<double> tr = rho_.trace();
  if (!(std::abs(tr - 1.0) <= kMatrixTolerance)) throw InvalidParameter("density matrix trace != 1");
  for (Eigen::Index i = 0; i < rho_.rows(); ++i) {
    if (!(rho_(i, i).real() >= -kMatrixTolerance) || std::abs(rho_(i, i).imag()) > kMatrixTolerance) {
      throw InvalidParameter("density matrix diagonal must be real and nonnegative");
    }
  }
}

std::string_view to_string(CoherenceMethod method) {
  switch (method) {
    case CoherenceMethod::matrix: return "matrix";
    case CoherenceMethod::analytic: return "analytic";
    case CoherenceMethod::protocol: return "protocol";
  }
  return "unknown";
}

double coherence_of_matrix(const SlitBasisDensityMatrix& rho) {
  const int n = rho.dimension();
  require_two_slits(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += std::abs(rho(i, j));
  return s / (n - 1);
}

SlitBasisDensityMatrix slit_density_matrix(const ExperimentConfig& cfg, double t, const Bath& bath) {
  require_valid(cfg);
  if (!(t >= 0.0)) throw InvalidParameter("t must be >= 0");
  const int n = cfg.slit_count();
  Eigen::MatrixXcd rho(n, n);
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n; ++k) {
      const auto cj = cfg.amplitudes.coefficient(static_cast<std::size_t>(j - 1));
      const auto ck = cfg.amplitudes.coefficient(static_cast<std::size_t>(k - 1));
      const double decay = j == k ? 1.0 : pair_decay_factor(j, k, t, cfg, bath);
      rho(j - 1, k - 1) = cj * std::conj(ck) * cfg.detector.overlaps(k - 1, j - 1) * decay;
    }
  }
  return SlitBasisDensityMatrix(std::move(rho));
}

SlitBasisDensityMatrix slit_density_matrix(const ExperimentConfig& cfg, double t, const Bath& bath,
                                           DetectorMode mode) {
  return slit_density_matrix(with_detector(cfg, mode), t, bath);
}

double coherence_analytic(const ExperimentConfig& cfg, double t, const Bath& bath) {
  const int n = cfg.slit_count();
  require_two_slits(n);
  if (!(t >= 0.0)) throw InvalidParameter("t must be >= 0");
  const auto& c = cfg.amplitudes.magnitudes;
  double s = 0.0;
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      if (j != k) {
        s += c[static_cast<std::size_t>(j - 1)] * c[static_cast<std::size_t>(k - 1)] *
             pair_decay_factor(j, k, t, cfg, bath);
      }
  return s / (n - 1);
}

double coherence_analytic(const ExperimentConfig& cfg, double t) {
  return coherence_analytic(cfg, t, bath_from_environment(cfg));
}

double coherence_analytic(std::span<const double> magnitudes, double kappa) {
  const auto n = static_cast<int>(magnitudes.size());
  require_two_slits(n);
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidParameter("kappa must be finite and >= 0");
  double s = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (j != k) {
        const double d = j - k;
        s += magnitudes[static_cast<std::size_t>(j)] * magnitudes[static_cast<std::size_t>(k)] *
             std::exp(-d * d * kappa);
      }
  return s / (n - 1);
}

double coherence_from_intensities(double i_par, double i_perp, int n) {
  require_two_slits(n);
  if (!(i_perp > 0.0) || !std::isfinite(i_perp) || !std::isfinite(i_par)) {
    throw InvalidParameter("I_perp must be finite and > 0");
  }
  return (i_par - i_perp) / i_perp / (n - 1);
}

// ---------------------------------------------------------------------------

PrimaryMaximum locate_primary_maximum(const ExperimentConfig& cfg) {
  require_far_field(cfg);
  const double center = cfg.slits.center();
  if (cfg.amplitudes.zero_phases()) return {center, 0.0};

  // All pairwise cosines share the form (k - j) u + theta_k - theta_j with
  // u = 2 pi l (x - centre) / (lambda L); search the screen for a common zero.
  const int n = cfg.slit_count();
  const auto& th = cfg.amplitudes.phases;
  const double l = cfg.slits.spacing_m;
  const double wave = 2.0 * std::numbers::pi * l / cfg.lambda_L();
  const auto grid = cfg.screen.grid();
  auto worst_cos = [&](double x) {
    const double u = wave * (x - center);
    double worst = 1.0;
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        worst = std::min(worst, std::cos((k - j) * u + th[static_cast<std::size_t>(k)] - th[static_cast<std::size_t>(j)]));
    return worst;
  };
  double best_x = grid.front();
  double best = -2.0;
  for (double x : grid) {
    const double w = worst_cos(x);
    if (w > best + 1e-15 || (std::abs(w - best) <= 1e-15 && std::abs(x - center) < std::abs(best_x - center))) {
      best = w;
      best_x = x;
    }
  }
  const double dx = cfg.screen.spacing();
  // Largest phase error a grid point can carry is (n-1) * wave * dx / 2.
  const double max_err = (n - 1) * wave * dx / 2.0;
  const double threshold = std::cos(std::min(max_err, std::numbers::pi)) - 1e-12;
  if (best < threshold) {
    std::ostringstream os;
    os << "no screen point brings every interference term to its maximum (best min cos = " << best
       << "); the two-mode protocol is inapplicable for these phases";
    throw ProtocolInapplicable(os.str());
  }
  return {best_x, dx};
}

PrimaryMaxIntensity primary_max_intensity(const ExperimentConfig& cfg, double t, const Bath& bath,
                                          DetectorMode mode) {
  require_valid(cfg);
  if (mode == DetectorMode::matrix) {
    throw InvalidParameter("primary maximum intensity is defined for parallel and orthogonal detectors only");
  }
  const PrimaryMaximum where = locate_primary_maximum(cfg);
  const int n = cfg.slit_count();
  const double eps = cfg.slits.width_m;
  const double a = alpha(t, eps, cfg.quanton.mass_kg, bath.gamma_per_s, bath.diffusion);
  const double far = cfg.lambda_L() / std::numbers::pi;
  const double d = where.x - cfg.slits.center();
  const double g = std::exp(-2.0 * eps * eps * d * d / (far * far));
  const auto& c = cfg.amplitudes.magnitudes;
  double bracket = 0.0;
  for (int j = 0; j < n; ++j) bracket += c[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(j)];
  if (mode == DetectorMode::parallel) {
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        if (j != k) {
          bracket += c[static_cast<std::size_t>(j - 1)] * c[static_cast<std::size_t>(k - 1)] *
                     pair_decay_factor(j, k, t, cfg, bath);
        }
  }
  return {g / std::sqrt(std::numbers::pi * a / 2.0) * bracket, where};
}

CoherenceReading coherence_by_protocol(const ExperimentConfig& cfg, double t, const Bath& bath) {
  const auto par = primary_max_intensity(cfg, t, bath, DetectorMode::parallel);
  const auto perp = primary_max_intensity(cfg, t, bath, DetectorMode::orthogonal);
  return {coherence_from_intensities(par.value, perp.value, cfg.slit_count()), CoherenceMethod::protocol, t};
}

// ---------------------------------------------------------------------------

double pair_decoherence_time(int j, int k, double diffusion, double spacing_m) {
  if (j == k) throw InvalidParameter("pair decoherence time needs two distinct slits");
  if (!(spacing_m > 0.0)) throw InvalidParameter("slit spacing must be > 0");
  if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
    throw NumericalError("decoherence time is infinite for D = 0");
  }
  const double sep = (j - k) * spacing_m;
  return 12.0 * constants::hbar * constants::hbar / (diffusion * sep * sep);
}

double two_slit_decoherence_time(double mass_kg, double gamma_per_s, double temperature_K, double spacing_m) {
  if (!(mass_kg > 0.0) || !(spacing_m > 0.0)) throw InvalidParameter("mass and spacing must be > 0");
  if (!(gamma_per_s > 0.0) || !(temperature_K > 0.0)) {
    throw NumericalError("decoherence time is infinite for gamma = 0 or T = 0");
  }
  return pair_decoherence_time(1, 2, diffusion_coefficient(mass_kg, gamma_per_s, temperature_K), spacing_m);
}

DecoherenceEstimate tau_d_from_coherence(double coherence, double t, double c1, double c2) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParameter("t must be > 0");
  const double ceiling = 2.0 * std::abs(c1 * c2);
  if (!std::isfinite(coherence)) throw InvalidParameter("coherence must be finite");
  if (coherence <= 0.0) throw InvalidParameter("coherence <= 0: fully decohered, tau_d cannot be resolved");
  if (coherence >= ceiling) {
    std::ostringstream os;
    os << "no decoherence detected: C = " << coherence << " >= 2|c1 c2| = " << ceiling;
    throw NumericalError(os.str());
  }
  return {t / std::log(ceiling / coherence), EstimateSource::coherence_inversion};
}

DecoherenceEstimate tau_d_from_intensities(double i_par, double i_perp, double wavelength_m, double distance_m,
                                           double mass_kg, double c1c2) {
  if (!(i_perp > 0.0) || !std::isfinite(i_par)) throw InvalidParameter("intensities must be finite with I_perp > 0");
  if (!(i_par > i_perp)) throw InvalidParameter("I_par <= I_perp: no interference excess to invert");
  if (!(c1c2 > 0.0 && c1c2 <= 0.5)) throw InvalidParameter("|c1 c2| must lie in (0, 1/2]");
  const double t = flight_time(wavelength_m, distance_m, mass_kg);
  const double coherence = coherence_from_intensities(i_par, i_perp, 2);
  auto est = tau_d_from_coherence(coherence, t, c1c2, 1.0);
  est.source = EstimateSource::intensity_inversion;
  return est;
}

// ---------------------------------------------------------------------------

double visibility(const IntensityProfile& profile) {
  const auto& v = profile.intensity;
  const std::size_t n = v.size();
  if (n < 3) throw InvalidParameter("visibility needs at least 3 samples");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (!(*hi - *lo > 1e-14 * std::max(std::abs(*hi), 1e-300))) throw InvalidParameter("flat profile has no fringes");

  const double mid = 0.5 * static_cast<double>(n - 1);
  std::size_t peak = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      if (peak == 0 || v[i] > v[peak] ||
          (v[i] == v[peak] && std::abs(static_cast<double>(i) - mid) < std::abs(static_cast<double>(peak) - mid))) {
        peak = i;
      }
    }
  }
  if (peak == 0) throw InvalidParameter("profile has no interior maximum");

  auto is_min = [&](std::size_t i) { return v[i] < v[i - 1] && v[i] <= v[i + 1]; };
  double sum = 0.0;
  int found = 0;
  for (std::size_t i = peak; i-- > 1;) {
    if (is_min(i)) {
      sum += v[i];
      ++found;
      break;
    }
  }
  for (std::size_t i = peak + 1; i + 1 < n; ++i) {
    if (is_min(i)) {
      sum += v[i];
      ++found;
      break;
    }
  }
  if (found == 0) return 0.0;
  const double vmin = sum / found;
  const double vmax = v[peak];
  return (vmax - vmin) / (vmax + vmin);
}

}  // namespace decolab
