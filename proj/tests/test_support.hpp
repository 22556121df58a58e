#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "decolab/physical_model.hpp"

namespace decolab::test {

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Random zero-phase Fraunhofer config: n in [2, 8], random magnitudes,
/// parallel detectors, mass/wavelength/geometry scattered around the presets.
inline ExperimentConfig random_config(std::mt19937_64& rng, bool zero_phases = true) {
  std::uniform_int_distribution<int> ni(2, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto cfg = load_preset(u(rng) < 0.5 ? "neon" : "c60", ni(rng));
  const int n = cfg.slit_count();
  std::vector<double> mags(static_cast<std::size_t>(n));
  double norm = 0.0;
  for (auto& m : mags) {
    m = 0.05 + u(rng);
    norm += m * m;
  }
  for (auto& m : mags) m /= std::sqrt(norm);
  cfg.amplitudes.magnitudes = mags;
  cfg.amplitudes.phases.assign(static_cast<std::size_t>(n), 0.0);
  if (!zero_phases)
    for (auto& p : cfg.amplitudes.phases) p = 6.0 * u(rng) - 3.0;
  cfg.slits.spacing_m *= 0.5 + u(rng);
  cfg.slits.width_m = cfg.slits.spacing_m * (0.1 + 0.1 * u(rng));
  cfg.screen.distance_m *= 0.8 + 0.4 * u(rng);
  cfg.environment.gamma_per_s = 10.0 * u(rng);
  return cfg;
}

/// Empirical Pearson correlation.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("decolab_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace decolab::test
