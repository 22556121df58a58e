#include "decolab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "decolab/analytic_engine.hpp"
#include "decolab/coherence.hpp"
#include "decolab/config_io.hpp"
#include "decolab/errors.hpp"
#include "decolab/master_oracle.hpp"
#include "decolab/output.hpp"
#include "decolab/physical_model.hpp"
#include "decolab/sweep.hpp"

namespace decolab::cli {

namespace {

struct Source {
  std::string preset;
  std::string config;
  std::optional<int> slits;

  void add_to(CLI::App& app) {
    auto* p = app.add_option("--preset", preset, "Named parameter set (neon, c60)");
    auto* c = app.add_option("--config", config, "Config file (key = value)");
    p->excludes(c);
    app.add_option("--slits", slits, "Number of slits (resets to equal amplitudes)")->check(CLI::Range(1, 64));
  }

  ExperimentConfig load() const {
    if (preset.empty() == config.empty()) throw InvalidParameter("exactly one of --preset or --config is required");
    ExperimentConfig cfg = preset.empty() ? load_config(config) : load_preset(preset, slits.value_or(4));
    if (slits && preset.empty()) cfg = with_slit_count(cfg, *slits);
    return cfg;
  }
};

// Writes to a file, or to `out` when the path is empty or "-".
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(out);
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidParameter("cannot open " + path + " for writing");
  fn(os);
  os.flush();
  if (!os) throw InvalidParameter("write failed for " + path);
}

// --- pattern ---------------------------------------------------------------

struct PatternArgs {
  Source src;
  std::optional<double> kappa;
  std::optional<double> gamma;
  std::optional<double> t_s;
  std::string mode = "exact";
  std::optional<std::size_t> points;
  std::string out;
  std::string svg;
  bool raw = false;
};

int cmd_pattern(const PatternArgs& a, std::ostream& out) {
  if (a.kappa && (a.gamma || a.t_s)) {
    throw InvalidParameter("--kappa cannot be combined with --gamma-per-s/--t-s; choose one time style");
  }
  const EvaluationMode mode = parse_evaluation_mode(a.mode);
  ExperimentConfig cfg = a.src.load();
  if (a.points) cfg.screen.points = *a.points;
  require_valid(cfg);

  double t = flight_time(cfg);
  Bath bath;
  if (a.gamma || a.t_s) {
    if (a.gamma) cfg.environment.gamma_per_s = *a.gamma;
    if (a.t_s) t = *a.t_s;
    bath = bath_from_environment(cfg);
  } else {
    bath = bath_for_kappa(cfg, a.kappa.value_or(0.0), t);
  }
  const auto grid = cfg.screen.grid();
  const auto profile =
      pattern(cfg, t, bath, mode, grid, a.raw ? Normalization::raw : Normalization::peak_normalized);
  emit(a.out, out, [&](std::ostream& os) { write_pattern_csv(profile, os); });
  if (!a.svg.empty()) write_svg(profile, a.svg, a.raw ? "intensity (1/m)" : "intensity (normalized)");
  return kExitOk;
}

// --- coherence -------------------------------------------------------------

struct CoherenceArgs {
  Source src;
  std::string range;
  std::string out;
  std::string method = "analytic";
};

int cmd_coherence(const CoherenceArgs& a, std::ostream& out) {
  const Range range = parse_range(a.range);
  if (a.method != "analytic" && a.method != "matrix" && a.method != "protocol") {
    throw InvalidParameter("unknown --method '" + a.method + "' (expected analytic|matrix|protocol)");
  }
  const ExperimentConfig cfg = a.src.load();
  const double t = flight_time(cfg);
  Series s{"t_over_taud", "C", {}};
  for (double kappa : range.values()) {
    const Bath bath = bath_for_kappa(cfg, kappa, t);
    double c = 0.0;
    if (a.method == "analytic") {
      c = coherence_analytic(cfg, t, bath);
    } else if (a.method == "matrix") {
      c = coherence_of_matrix(slit_density_matrix(cfg, t, bath));
    } else {
      c = coherence_by_protocol(cfg, t, bath).value;
    }
    s.rows.emplace_back(kappa, c);
  }
  emit(a.out, out, [&](std::ostream& os) { write_series_csv(s, os); });
  return kExitOk;
}

// --- taud ------------------------------------------------------------------

struct TaudArgs {
  double i_par = 0.0, i_perp = 0.0, lambda = 0.0, L = 0.0, mass = 0.0, c1c2 = 0.5;
};

int cmd_taud(const TaudArgs& a, std::ostream& out) {
  const auto est = tau_d_from_intensities(a.i_par, a.i_perp, a.lambda, a.L, a.mass, a.c1c2);
  char buf[64];
  std::snprintf(buf, sizeof buf, "tau_d = %.8e s\n", est.tau_d);
  out << buf;
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
  int slits = 2;
  double kappa = 0.5;
  std::size_t grid = 512;
  double tol = 1e-2;
  double eps_hat = 0.15;
  double phi = 4.0 * std::numbers::pi;
  double gamma_hat = 1e-3;
  double dt = 1e-3;
  std::optional<double> half_width;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const OracleSetup setup = make_oracle_setup(a.slits, a.eps_hat, a.phi, a.gamma_hat, a.kappa);
  const double required = required_half_width(setup.cfg, setup.bath, setup.t_final_s);
  SolverParams p;
  p.N = a.grid;
  p.center = setup.cfg.slits.center() / setup.cfg.slits.spacing_m;
  // Default: the widest domain the grid still resolves at 8 points per eps.
  p.half_width = a.half_width.value_or(static_cast<double>(a.grid) * a.eps_hat / 16.0);
  p.dt = a.dt;
  if (p.half_width < required) {
    std::ostringstream os;
    os << "domain half-width " << p.half_width << " is below the required " << required
       << "; increase --grid or --half-width";
    throw InvalidParameter(os.str());
  }
  DensityGrid g = init_density(setup.cfg, p);
  const auto rep = evolve(g, 1.0, p, setup.env);
  const auto cmp = compare_to_analytic(g, setup.cfg, setup.bath, setup.t_final_s, a.tol);
  char buf[160];
  std::snprintf(buf, sizeof buf, "relative_l2 = %.6e\nsup = %.6e\ntolerance = %.6e\n", cmp.relative_l2, cmp.sup,
                cmp.tolerance);
  out << buf;
  std::snprintf(buf, sizeof buf, "steps = %zu\ntrace_drift = %.3e\nhermiticity = %.3e\nboundary_mass = %.3e\n",
                rep.steps, rep.trace_drift, rep.hermiticity_error, rep.boundary_mass);
  out << buf << (cmp.passed ? "PASS\n" : "FAIL\n");
  return cmp.passed ? kExitOk : kExitNumerical;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  Source src;
  std::string param;
  std::string range;
  std::optional<double> kappa;
  std::optional<double> t_s;
  std::optional<double> gamma;
  std::optional<double> temperature;
  std::optional<long> jobs;
  std::string out;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  SweepSpec spec;
  spec.parameter = parse_sweep_parameter(a.param);
  spec.range = parse_range(a.range);
  spec.kappa = a.kappa;
  spec.t_s = a.t_s;
  if (spec.kappa && spec.parameter != SweepParameter::slits) {
    throw InvalidParameter("--kappa applies to slit-count sweeps only");
  }
  const unsigned jobs = resolve_jobs(a.jobs);
  ExperimentConfig cfg = a.src.load();
  if (a.gamma) cfg.environment.gamma_per_s = *a.gamma;
  if (a.temperature) cfg.environment.temperature_K = *a.temperature;
  const auto rows = run_sweep(cfg, spec, jobs);

  bool with_tau = false;
  for (const auto& r : rows) with_tau = with_tau || r.tau_d_s.has_value();
  std::vector<std::string> header{std::string(to_string(spec.parameter)), "C"};
  if (with_tau) header.emplace_back("tau_d_s");
  std::vector<std::vector<double>> table;
  table.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<double> row{r.value, r.coherence};
    if (with_tau) row.push_back(r.tau_d_s.value_or(std::numeric_limits<double>::infinity()));
    table.push_back(std::move(row));
  }
  emit(a.out, out, [&](std::ostream& os) { write_table_csv(header, table, os); });
  return kExitOk;
}

// --- preset ----------------------------------------------------------------

int cmd_preset_list(std::ostream& out) {
  const auto names = preset_names();
  for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << '\n';
  return kExitOk;
}

int cmd_preset_show(const std::string& name, int slits, std::ostream& out) {
  out << format_config(load_preset(name, slits));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decohering n-slit interference: patterns, coherence, decoherence times", "decolab"};
  app.require_subcommand(1);

  auto* preset = app.add_subcommand("preset", "List or show built-in parameter sets");
  preset->require_subcommand(1);
  preset->add_subcommand("list", "List preset names");
  std::string show_name;
  int show_slits = 4;
  auto* show = preset->add_subcommand("show", "Print a preset in config format");
  show->add_option("name", show_name, "Preset name")->required();
  show->add_option("--slits", show_slits, "Number of slits")->check(CLI::Range(1, 64));

  PatternArgs pa;
  auto* pat = app.add_subcommand("pattern", "Screen intensity profile as CSV (and optional SVG)");
  pa.src.add_to(*pat);
  pat->add_option("--kappa", pa.kappa, "t / tau_d at the flight time")->check(CLI::NonNegativeNumber);
  pat->add_option("--gamma-per-s", pa.gamma, "Friction coefficient (absolute time style)")
      ->check(CLI::NonNegativeNumber);
  pat->add_option("--t-s", pa.t_s, "Evaluation time in seconds (absolute time style)")->check(CLI::NonNegativeNumber);
  pat->add_option("--mode", pa.mode, "exact|farfield|nodecoherence");
  pat->add_option("--points", pa.points, "Screen grid points")->check(CLI::Range(2, 10'000'000));
  pat->add_option("--out", pa.out, "CSV output path (stdout if omitted)");
  pat->add_option("--svg", pa.svg, "Also write an SVG plot");
  pat->add_flag("--raw", pa.raw, "Do not peak-normalize");

  CoherenceArgs ca;
  auto* coh = app.add_subcommand("coherence", "Coherence C versus t / tau_d as CSV");
  ca.src.add_to(*coh);
  coh->add_option("--kappa-range", ca.range, "start:stop:step")->required();
  coh->add_option("--out", ca.out, "CSV output path (stdout if omitted)");
  coh->add_option("--method", ca.method, "analytic|matrix|protocol");

  TaudArgs ta;
  auto* taud = app.add_subcommand("taud", "Decoherence time from the two primary-maximum intensities");
  taud->add_option("--imax-par", ta.i_par, "Primary maximum, parallel detectors")->required();
  taud->add_option("--imax-perp", ta.i_perp, "Primary maximum, orthogonal detectors")->required();
  taud->add_option("--lambda-m", ta.lambda, "de Broglie wavelength [m]")->required();
  taud->add_option("--L-m", ta.L, "Slit-to-screen distance [m]")->required();
  taud->add_option("--mass-kg", ta.mass, "Particle mass [kg]")->required();
  taud->add_option("--c1c2", ta.c1c2, "|c1 c2| (default 1/2)");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Compare the master-equation oracle with the closed form");
  ver->add_option("--slits", va.slits, "Number of slits")->check(CLI::Range(1, 16));
  ver->add_option("--kappa", va.kappa, "t / tau_d at the flight time")->check(CLI::NonNegativeNumber);
  ver->add_option("--grid", va.grid, "Grid points per axis (power of two)");
  ver->add_option("--tol", va.tol, "Relative L2 tolerance")->check(CLI::PositiveNumber);
  ver->add_option("--eps-hat", va.eps_hat, "Slit width / spacing")->check(CLI::PositiveNumber);
  ver->add_option("--phi", va.phi, "2 pi l^2 / (lambda L)")->check(CLI::PositiveNumber);
  ver->add_option("--gamma-hat", va.gamma_hat, "gamma * flight time")->check(CLI::NonNegativeNumber);
  ver->add_option("--dt", va.dt, "Time step in flight times")->check(CLI::PositiveNumber);
  ver->add_option("--half-width", va.half_width, "Domain half-width in slit spacings")->check(CLI::PositiveNumber);

  SweepArgs sa;
  auto* swp = app.add_subcommand("sweep", "Coherence over a parameter range as CSV");
  sa.src.add_to(*swp);
  swp->add_option("--param", sa.param, "t_over_taud|T_K|gamma_per_s|n")->required();
  swp->add_option("--range", sa.range, "start:stop:step")->required();
  swp->add_option("--kappa", sa.kappa, "Fixed t / tau_d for n sweeps")->check(CLI::NonNegativeNumber);
  swp->add_option("--t-s", sa.t_s, "Evaluation time [s] (flight time by default)")->check(CLI::NonNegativeNumber);
  swp->add_option("--gamma-per-s", sa.gamma, "Override friction coefficient")->check(CLI::NonNegativeNumber);
  swp->add_option("--T-K", sa.temperature, "Override bath temperature")->check(CLI::NonNegativeNumber);
  swp->add_option("--jobs", sa.jobs, "Worker threads (env DECOLAB_JOBS)");
  swp->add_option("--out", sa.out, "CSV output path (stdout if omitted)");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("decolab");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (preset->parsed()) {
      if (show->parsed()) return cmd_preset_show(show_name, show_slits, out);
      return cmd_preset_list(out);
    }
    if (pat->parsed()) return cmd_pattern(pa, out);
    if (coh->parsed()) return cmd_coherence(ca, out);
    if (taud->parsed()) return cmd_taud(ta, out);
    if (ver->parsed()) return cmd_verify(va, out);
    if (swp->parsed()) return cmd_sweep(sa, out);
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.field().empty()) err << " [" << e.field() << "]";
    if (e.line() > 0) err << " at line " << e.line();
    err << ": " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ProtocolInapplicable& e) {
    err << "protocol inapplicable: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const InvalidParameter& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInvalid;
}

}  // namespace decolab::cli
