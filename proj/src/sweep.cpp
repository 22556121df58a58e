#include "decolab/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "decolab/coherence.hpp"
#include "decolab/errors.hpp"

namespace decolab {

namespace {

double parse_number(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw InvalidParameter("invalid " + std::string(what) + " '" + std::string(s) + "' in range");
  }
  return v;
}

}  // namespace

std::size_t Range::count() const {
  return static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
}

std::vector<double> Range::values() const {
  const std::size_t n = count();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i) * step;
  return v;
}

Range parse_range(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (a == std::string_view::npos || b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos) {
    throw InvalidParameter("range must be start:stop:step, got '" + std::string(text) + "'");
  }
  Range r{parse_number(text.substr(0, a), "start"), parse_number(text.substr(a + 1, b - a - 1), "stop"),
          parse_number(text.substr(b + 1), "step")};
  if (!(r.step > 0.0)) throw InvalidParameter("range step must be > 0");
  if (!(r.start <= r.stop)) throw InvalidParameter("range start must be <= stop");
  if (r.count() > 10'000'000) throw InvalidParameter("range has too many points");
  return r;
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "t_over_taud") return SweepParameter::t_over_taud;
  if (name == "T_K") return SweepParameter::temperature;
  if (name == "gamma_per_s") return SweepParameter::gamma;
  if (name == "n") return SweepParameter::slits;
  throw InvalidParameter("unknown sweep parameter '" + std::string(name) +
                         "' (expected t_over_taud|T_K|gamma_per_s|n)");
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::t_over_taud: return "t_over_taud";
    case SweepParameter::temperature: return "T_K";
    case SweepParameter::gamma: return "gamma_per_s";
    case SweepParameter::slits: return "n";
  }
  return "unknown";
}

namespace {

SweepRow evaluate(const ExperimentConfig& base, const SweepSpec& spec, double value) {
  const double t = spec.t_s ? *spec.t_s : flight_time(base);
  SweepRow row{value, 0.0, std::nullopt};
  switch (spec.parameter) {
    case SweepParameter::t_over_taud:
      row.coherence = coherence_analytic(base.amplitudes.magnitudes, value);
      break;
    case SweepParameter::temperature:
    case SweepParameter::gamma: {
      ExperimentConfig cfg = base;
      if (spec.parameter == SweepParameter::temperature) {
        cfg.environment.temperature_K = value;
      } else {
        cfg.environment.gamma_per_s = value;
      }
      const Bath bath = bath_from_environment(cfg);
      row.coherence = coherence_analytic(cfg, t, bath);
      if (bath.diffusion > 0.0) row.tau_d_s = decoherence_time(cfg, bath);
      break;
    }
    case SweepParameter::slits: {
      if (std::abs(value - std::round(value)) > 1e-9 || value < 1.0) {
        throw InvalidParameter("slit count must be a positive integer");
      }
      const ExperimentConfig cfg = with_slit_count(base, static_cast<int>(std::lround(value)));
      if (spec.kappa) {
        row.coherence = coherence_analytic(cfg.amplitudes.magnitudes, *spec.kappa);
      } else {
        row.coherence = coherence_analytic(cfg, t, bath_from_environment(cfg));
      }
      break;
    }
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const SweepSpec& spec, unsigned jobs) {
  require_valid(base);
  if (spec.parameter == SweepParameter::temperature && !(base.environment.gamma_per_s > 0.0)) {
    throw InvalidParameter("T_K sweep needs gamma > 0; the coherence does not depend on T when gamma = 0");
  }
  if (spec.parameter == SweepParameter::gamma && !(base.environment.temperature_K > 0.0)) {
    throw InvalidParameter("gamma_per_s sweep needs T > 0");
  }
  if (spec.t_s && !(*spec.t_s >= 0.0)) throw InvalidParameter("t must be >= 0");

  const auto values = spec.range.values();
  std::vector<SweepRow> rows(values.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(values.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_at = values.size();
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        rows[i] = evaluate(base, spec, values[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        // Report the lowest failing point so the error does not depend on scheduling.
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

unsigned resolve_jobs(std::optional<long> flag) {
  long jobs = 1;
  if (flag) {
    jobs = *flag;
  } else if (const char* env = std::getenv("DECOLAB_JOBS"); env && *env) {
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), jobs);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw InvalidParameter("DECOLAB_JOBS must be a positive integer");
    }
  }
  if (jobs < 1 || jobs > 1024) throw InvalidParameter("jobs must be between 1 and 1024");
  return static_cast<unsigned>(jobs);
}

}  // namespace decolab
