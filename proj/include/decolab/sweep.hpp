#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decolab/physical_model.hpp"

namespace decolab {

/// start:stop:step with step > 0 and start <= stop.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  /// floor((stop - start) / step + 1e-9) + 1 points; start == stop gives one.
  std::size_t count() const;
  std::vector<double> values() const;
};

Range parse_range(std::string_view text);

enum class SweepParameter { t_over_taud, temperature, gamma, slits };

SweepParameter parse_sweep_parameter(std::string_view name);
std::string_view to_string(SweepParameter p);

/// Everything a sweep point needs besides the swept value.
struct SweepSpec {
  SweepParameter parameter = SweepParameter::t_over_taud;
  Range range;
  /// Evaluation time; flight time when unset.
  std::optional<double> t_s;
  /// For slit sweeps: fixed t / tau_d instead of the physical bath.
  std::optional<double> kappa;
};

struct SweepRow {
  double value = 0.0;
  double coherence = 0.0;
  std::optional<double> tau_d_s;
};

/// Evaluates coherence_analytic at every range point using up to `jobs`
/// threads. Rows come back in ascending parameter order.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const SweepSpec& spec, unsigned jobs = 1);

/// --jobs value if given, else DECOLAB_JOBS, else 1. Throws on garbage.
unsigned resolve_jobs(std::optional<long> flag);

}  // namespace decolab
