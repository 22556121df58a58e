#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "decolab/physical_model.hpp"

namespace decolab {

/// exact: full closed-form diagonal of the Gaussian-slit solution.
/// farfield: weak-coupling Fraunhofer limit with per-pair decay factors.
/// no_decoherence: farfield with every decay factor set to 1.
enum class EvaluationMode { exact, farfield, no_decoherence };

std::string_view to_string(EvaluationMode mode);
EvaluationMode parse_evaluation_mode(std::string_view text);

enum class Normalization { raw, peak_normalized };

/// Sampled rho(x, x, t). Raw values are in 1/m. Peak-normalized profiles are
/// divided by the grid maximum of the decoherence-free pattern at the same t
/// (reference_peak), so the reference itself peaks at exactly 1.
struct IntensityProfile {
  std::vector<double> x;
  std::vector<double> intensity;
  double t = 0.0;
  Normalization normalization = Normalization::raw;
  double reference_peak = 1.0;

  std::size_t size() const { return x.size(); }
  double max() const;
};

// ---------------------------------------------------------------------------
// Auxiliary quantities. gamma -> 0 is handled by the analytic limit.
// ---------------------------------------------------------------------------

/// (1 - exp(-2 gamma t)) / gamma, equal to 2t at gamma = 0.
double spreading_time(double gamma_per_s, double t);

/// [4 u + 4 exp(-2u) - exp(-4u) - 3] / gamma^3 with u = gamma t. Below
/// u = 0.5 the bracket is summed from its Taylor series (16/3) u^3 - 8 u^4 + ...
/// since the direct form cancels catastrophically.
double diffusion_bracket(double gamma_per_s, double t);

/// Squared screen width alpha(t) [m^2].
double alpha(double t, double eps_m, double mass_kg, double gamma_per_s, double diffusion);

/// Exponent numerator f_jk(x) [m^2] of the (j, k) cross term; j, k are 1-based.
double f_jk(double x, int j, int k, double t, const ExperimentConfig& cfg, const Bath& bath);

/// Argument of the (j, k) cosine in the exact solution, including theta_k - theta_j.
double phase_argument(double x, int j, int k, double t, const ExperimentConfig& cfg, const Bath& bath);

/// Fraunhofer cosine argument 2 pi l (k - j)(x - l (k + j)/2) / (lambda L) + theta_k - theta_j.
double farfield_phase(double x, int j, int k, const ExperimentConfig& cfg);

/// exp(-D (j - k)^2 l^2 t / (12 hbar^2)).
double pair_decay_factor(int j, int k, double t, const ExperimentConfig& cfg, const Bath& bath);

// ---------------------------------------------------------------------------
// Intensity
// ---------------------------------------------------------------------------

struct PairTerm {
  int j = 0;  ///< 1-based, j < k
  int k = 0;
  double value = 0.0;  ///< (j,k) + (k,j) contribution, prefactor included
};

/// Term-wise decomposition of rho(x, x, t).
struct IntensityTerms {
  double prefactor = 0.0;   ///< 1 / sqrt(pi alpha / 2)
  double incoherent = 0.0;  ///< sum_j |c_j|^2 term, prefactor included
  std::vector<PairTerm> pairs;

  double cross() const;
  double total() const { return incoherent + cross(); }
};

IntensityTerms intensity_terms(double x, double t, const ExperimentConfig& cfg, const Bath& bath,
                               EvaluationMode mode);

double intensity(double x, double t, const ExperimentConfig& cfg, const Bath& bath, EvaluationMode mode);

/// Bath taken from cfg.environment (D = 2 m gamma k_B T).
double intensity(double x, double t, const ExperimentConfig& cfg, EvaluationMode mode);

IntensityProfile pattern(const ExperimentConfig& cfg, double t, const Bath& bath, EvaluationMode mode,
                         std::span<const double> grid, Normalization norm = Normalization::peak_normalized);

/// Pattern on cfg.screen at the flight time with t / tau_d = kappa.
IntensityProfile pattern_at_kappa(const ExperimentConfig& cfg, double kappa, EvaluationMode mode,
                                  Normalization norm = Normalization::peak_normalized);

}  // namespace decolab
