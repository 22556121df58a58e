#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "decolab/analytic_engine.hpp"
#include "decolab/physical_model.hpp"

namespace decolab {

/// rho_jk(t) = c_j c_k^* O_kj exp(-(j-k)^2 t / tau_d) in the slit basis.
/// Construction checks Hermiticity, unit trace and a real nonnegative diagonal.
class SlitBasisDensityMatrix {
public:
  explicit SlitBasisDensityMatrix(Eigen::MatrixXcd rho);

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  int dimension() const { return static_cast<int>(rho_.rows()); }
  std::complex<double> operator()(int i, int j) const { return rho_(i, j); }

private:
  Eigen::MatrixXcd rho_;
};

enum class CoherenceMethod { matrix, analytic, protocol };
std::string_view to_string(CoherenceMethod method);

struct CoherenceReading {
  double value = 0.0;
  CoherenceMethod method = CoherenceMethod::analytic;
  double t = 0.0;
};

enum class EstimateSource { formula, coherence_inversion, intensity_inversion };

struct DecoherenceEstimate {
  double tau_d = 0.0;  ///< [s]
  EstimateSource source = EstimateSource::formula;
};

/// (1/(n-1)) sum_{i != j} |rho_ij|. Throws InvalidParameter for n = 1.
double coherence_of_matrix(const SlitBasisDensityMatrix& rho);

/// Uses the detector overlaps stored in cfg.
SlitBasisDensityMatrix slit_density_matrix(const ExperimentConfig& cfg, double t, const Bath& bath);
/// Same with the detector switched to `mode` (matrix keeps cfg's overlaps).
SlitBasisDensityMatrix slit_density_matrix(const ExperimentConfig& cfg, double t, const Bath& bath,
                                           DetectorMode mode);

/// (1/(n-1)) sum_{j != k} |c_j c_k| exp(-(j-k)^2 t / tau_d); never reads the
/// detector overlaps.
double coherence_analytic(const ExperimentConfig& cfg, double t, const Bath& bath);
double coherence_analytic(const ExperimentConfig& cfg, double t);
/// Same sum parameterised by kappa = t / tau_d.
double coherence_analytic(std::span<const double> magnitudes, double kappa);

/// (1/(n-1)) (I_par - I_perp) / I_perp. Not clamped.
double coherence_from_intensities(double i_par, double i_perp, int n);

struct PrimaryMaximum {
  double x = 0.0;           ///< [m]
  double resolution = 0.0;  ///< grid step used to locate x; 0 when analytic
};

/// Screen point where every Fraunhofer cosine equals one. Zero phases give the
/// array centre analytically; otherwise the screen grid is searched and
/// ProtocolInapplicable is thrown if no grid point brings all cosines to 1.
PrimaryMaximum locate_primary_maximum(const ExperimentConfig& cfg);

struct PrimaryMaxIntensity {
  double value = 0.0;  ///< [1/m]
  PrimaryMaximum location;
};

/// I_max for the parallel or orthogonal detector setting, both evaluated at
/// the common location from locate_primary_maximum.
PrimaryMaxIntensity primary_max_intensity(const ExperimentConfig& cfg, double t, const Bath& bath,
                                          DetectorMode mode);

/// Runs both detector settings and applies the measurement formula.
CoherenceReading coherence_by_protocol(const ExperimentConfig& cfg, double t, const Bath& bath);

/// 12 hbar^2 / (D (j-k)^2 l^2).
double pair_decoherence_time(int j, int k, double diffusion, double spacing_m);

/// 6 hbar^2 / (m gamma k_B T l^2), computed through the pair formula so the two
/// agree bit for bit.
double two_slit_decoherence_time(double mass_kg, double gamma_per_s, double temperature_K, double spacing_m);

/// tau_d = t / log(2 |c1 c2| / C).
DecoherenceEstimate tau_d_from_coherence(double coherence, double t, double c1, double c2);

/// tau_d = (lambda L m / h) / log(2|c1 c2| / C) with C = (I_par - I_perp) / I_perp.
/// For the symmetric case (c1c2 = 1/2) this is log(I_perp / (I_par - I_perp)).
DecoherenceEstimate tau_d_from_intensities(double i_par, double i_perp, double wavelength_m, double distance_m,
                                           double mass_kg, double c1c2 = 0.5);

/// Fringe visibility (I_max - I_min)/(I_max + I_min) from the largest interior
/// maximum and the mean of its neighbouring minima. A profile with a maximum
/// but no resolved minima has no fringes and reports 0.
double visibility(const IntensityProfile& profile);

}  // namespace decolab
