#include "decolab/master_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "decolab/constants.hpp"
#include "decolab/errors.hpp"

namespace decolab {

namespace {

using cplx = std::complex<double>;

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

void check_params(const SolverParams& p) {
  if (!is_power_of_two(p.N)) throw InvalidParameter("oracle grid size N must be a power of two");
  if (!(p.half_width > 0.0) || !std::isfinite(p.half_width)) throw InvalidParameter("domain half-width must be > 0");
  if (!std::isfinite(p.center)) throw InvalidParameter("domain centre must be finite");
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw InvalidParameter("time step must be > 0");
  if (p.friction_substeps < 1) throw InvalidParameter("friction substeps must be >= 1");
}

void check_env(const OracleEnvironment& env) {
  if (!(env.phi > 0.0) || !std::isfinite(env.phi)) throw InvalidParameter("phi must be > 0");
  if (!(env.gamma_hat >= 0.0) || !std::isfinite(env.gamma_hat)) throw InvalidParameter("gamma_hat must be >= 0");
  if (!(env.decoherence_rate >= 0.0) || !std::isfinite(env.decoherence_rate)) {
    throw InvalidParameter("decoherence rate must be >= 0");
  }
}

// fftw_complex is layout-compatible with std::complex<double>.
fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

// ---------------------------------------------------------------------------
// DensityGrid

double DensityGrid::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += values[i * n + i].real();
  return s * dx;
}

double DensityGrid::max_abs() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

double DensityGrid::hermiticity_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      worst = std::max(worst, std::abs(values[i * n + j] - std::conj(values[j * n + i])));
  const double m = max_abs();
  return m > 0.0 ? worst / m : worst;
}

OracleEnvironment OracleEnvironment::from(const DimensionlessInstance& inst) {
  return {inst.phi, inst.gamma_hat, inst.decoherence_rate};
}

// ---------------------------------------------------------------------------
// Initial state

DensityGrid init_density(const ExperimentConfig& cfg, const SolverParams& params) {
  require_valid(cfg);
  check_params(params);
  const double l = cfg.slits.spacing_m;
  const double eps = cfg.slits.width_m / l;
  const double fringe = cfg.lambda_L() / (l * l);
  const double dx = params.dx();
  const double slack = 1.0 + 1e-12;
  if (dx > eps / 8.0 * slack) {
    std::ostringstream os;
    os << "grid under-resolves the slit width: dx = " << dx << " > eps/8 = " << eps / 8.0 << " (slit width scale)";
    throw InvalidParameter(os.str());
  }
  if (dx > fringe / 8.0 * slack) {
    std::ostringstream os;
    os << "grid under-resolves the fringe period: dx = " << dx << " > (lambda L / l^2)/8 = " << fringe / 8.0
       << " (fringe scale)";
    throw InvalidParameter(os.str());
  }

  const std::size_t N = params.N;
  const int n = cfg.slit_count();
  DensityGrid g;
  g.n = N;
  g.x0 = params.x0();
  g.dx = dx;
  g.t = 0.0;
  g.values.assign(N * N, cplx{});

  // psi_j(x) = c_j exp(-(x - j)^2 / eps^2); rho = sum_jk psi_j(x) conj(psi_k(x')) O_kj.
  std::vector<std::vector<cplx>> psi(static_cast<std::size_t>(n), std::vector<cplx>(N));
  for (int j = 1; j <= n; ++j) {
    const cplx c = cfg.amplitudes.coefficient(static_cast<std::size_t>(j - 1));
    for (std::size_t i = 0; i < N; ++i) {
      const double d = g.x(i) - j;
      psi[static_cast<std::size_t>(j - 1)][i] = c * std::exp(-d * d / (eps * eps));
    }
  }
  const auto& O = cfg.detector.overlaps;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const double o = O(k, j);
      if (o == 0.0) continue;
      const auto& a = psi[static_cast<std::size_t>(j)];
      const auto& b = psi[static_cast<std::size_t>(k)];
      for (std::size_t r = 0; r < N; ++r) {
        const cplx ar = a[r] * o;
        if (ar == cplx{}) continue;
        cplx* row = &g.values[r * N];
        for (std::size_t s = 0; s < N; ++s) row[s] += ar * std::conj(b[s]);
      }
    }
  }
  const double tr = g.trace();
  if (!(tr > 0.0)) throw NumericalError("initial density has no mass on the grid");
  for (auto& v : g.values) v /= tr;
  return g;
}

DensityGrid init_density(const ExperimentConfig& cfg, DetectorMode mode, const SolverParams& params) {
  return init_density(with_detector(cfg, mode), params);
}

double required_half_width(const ExperimentConfig& cfg, const Bath& bath, double t_s) {
  const double l = cfg.slits.spacing_m;
  const double a = alpha(t_s, cfg.slits.width_m, cfg.quanton.mass_kg, bath.gamma_per_s, bath.diffusion);
  return (cfg.slit_count() - 1) / 2.0 + 3.0 * std::sqrt(a) / l;
}

// ---------------------------------------------------------------------------
// Propagator

struct Propagator::Impl {
  std::size_t N = 0;
  SolverParams params;
  OracleEnvironment env;
  double dt = -1.0;

  // Batched 1D transforms along rows. The kinetic step U rho U^dagger is
  // applied as rows, conjugate transpose, rows, conjugate transpose, which
  // keeps every transform contiguous in memory.
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  fftw_plan forward_unaligned = nullptr;
  fftw_plan backward_unaligned = nullptr;
  cplx* scratch = nullptr;     // fftw_malloc'd, N * N
  std::vector<cplx> kinetic;  // per-row multiplier exp(+i k^2 h / (2 phi)) / N

  // Per diagonal offset d = i - j (index d + N - 1): fused decoherence and
  // friction weights for the two anti-diagonal source points.
  struct Tap {
    int shift = 0;  // m: sources (i - m, j + m) and (i - m - 1, j + m + 1)
    double w0 = 1.0;
    double w1 = 0.0;
  };
  std::vector<Tap> pre;   // D/2 then F/2
  std::vector<Tap> post;  // F/2 then D/2
  std::vector<Tap> mid;   // extra friction substeps, no decoherence
  std::vector<Tap> between;  // D/2 F D/2: post of one step fused with pre of the next
  bool friction = false;

  explicit Impl(const SolverParams& p, const OracleEnvironment& e) : N(p.N), params(p), env(e) {
    scratch = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * N * N));
    if (!scratch) throw NumericalError("cannot allocate oracle workspace");
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward = make_plan(FFTW_FORWARD, FFTW_ESTIMATE);
    backward = make_plan(FFTW_BACKWARD, FFTW_ESTIMATE);
    forward_unaligned = make_plan(FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_unaligned = make_plan(FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!forward || !backward || !forward_unaligned || !backward_unaligned) {
      release();
      throw NumericalError("FFTW plan creation failed");
    }
  }

  fftw_plan make_plan(int sign, unsigned flags) {
    const int n[1] = {static_cast<int>(N)};
    const int rows = static_cast<int>(N);
    return fftw_plan_many_dft(1, n, rows, as_fftw(scratch), nullptr, 1, rows, as_fftw(scratch), nullptr, 1, rows,
                              sign, flags);
  }

  void release() {
    for (fftw_plan* plan : {&forward, &backward, &forward_unaligned, &backward_unaligned}) {
      if (*plan) fftw_destroy_plan(*plan);
      *plan = nullptr;
    }
    fftw_free(scratch);
    scratch = nullptr;
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    release();
  }

  void prepare(double h) {
    if (h == dt) return;
    dt = h;
    const double dx = params.dx();
    const std::size_t diag = 2 * N - 1;

    if (params.enable_kinetic) {
      kinetic.resize(N);
      const double dk = 2.0 * std::numbers::pi / (static_cast<double>(N) * dx);
      const double c = h / (2.0 * env.phi);
      for (std::size_t i = 0; i < N; ++i) {
        const double k = dk * (i < N / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(N));
        kinetic[i] = std::polar(1.0 / static_cast<double>(N), k * k * c);
      }
    }

    // Decoherence half-step multiplier exp(-3 rate (x - x')^2 h / 2).
    std::vector<double> dmul(diag, 1.0);
    if (params.enable_decoherence && env.decoherence_rate > 0.0) {
      for (std::size_t q = 0; q < diag; ++q) {
        const double r = (static_cast<double>(q) - static_cast<double>(N - 1)) * dx;
        dmul[q] = std::exp(-3.0 * env.decoherence_rate * r * r * h / 2.0);
      }
    }

    // Friction dilates r = x - x': rho(r, t + h) = rho(r exp(-2 gamma h), t),
    // so each point reads from (i - s, j + s) with s = c (i - j).
    friction = params.enable_friction && env.gamma_hat > 0.0;
    const double hf = h / 2.0 / params.friction_substeps;
    const double c = friction ? -std::expm1(-2.0 * env.gamma_hat * hf) / 2.0 : 0.0;
    if (friction) {
      const double width = 2.0 * params.half_width;
      if (env.gamma_hat * width * h > 0.5 * dx) {
        throw InvalidParameter("friction CFL bound violated: gamma_hat * width * dt/2 > dx/2");
      }
    }
    // Two-tap interpolation along the anti-diagonal for a shift coefficient
    // cc, with decoherence weights applied at the source (before) and/or the
    // target (after).
    auto dm_at = [&](long dd) {
      const long idx = dd + static_cast<long>(N) - 1;
      if (idx < 0 || idx >= static_cast<long>(diag)) return 1.0;
      return dmul[static_cast<std::size_t>(idx)];
    };
    auto build = [&](double cc, bool before, bool after) {
      std::vector<Tap> taps(diag);
      for (std::size_t q = 0; q < diag; ++q) {
        const long d = static_cast<long>(q) - static_cast<long>(N - 1);
        const double sh = cc * static_cast<double>(d);
        const double m = std::floor(sh);
        const double f = sh - m;
        const int mi = static_cast<int>(m);
        const long d0 = d - 2L * mi;  // source diagonals d0 and d0 - 2
        const double out = after ? dmul[q] : 1.0;
        taps[q] = {mi, out * (1.0 - f) * (before ? dm_at(d0) : 1.0), out * f * (before ? dm_at(d0 - 2) : 1.0)};
      }
      return taps;
    };
    const double c_full = friction ? -std::expm1(-2.0 * env.gamma_hat * h) / 2.0 : 0.0;
    pre = build(c, true, false);
    post = build(c, false, true);
    mid = build(c, false, false);
    between = build(c_full, true, true);
  }

  void row_propagate(cplx* data) const {
    const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(data)) ==
                         fftw_alignment_of(reinterpret_cast<double*>(scratch));
    fftw_execute_dft(aligned ? forward : forward_unaligned, as_fftw(data), as_fftw(data));
    // Spelled out: std::complex operator* takes a slow NaN-recovery branch.
    // Non-finite values are caught by the divergence check instead.
    for (std::size_t i = 0; i < N; ++i) {
      cplx* row = data + i * N;
      for (std::size_t j = 0; j < N; ++j) {
        const double a = row[j].real(), b = row[j].imag();
        const double c = kinetic[j].real(), d = kinetic[j].imag();
        row[j] = cplx(a * c - b * d, a * d + b * c);
      }
    }
    fftw_execute_dft(aligned ? backward : backward_unaligned, as_fftw(data), as_fftw(data));
  }

  void conjugate_transpose(const cplx* in, cplx* out) const {
    constexpr std::size_t B = 32;
    for (std::size_t ib = 0; ib < N; ib += B)
      for (std::size_t jb = 0; jb < N; jb += B)
        for (std::size_t i = ib; i < std::min(ib + B, N); ++i)
          for (std::size_t j = jb; j < std::min(jb + B, N); ++j) out[j * N + i] = std::conj(in[i * N + j]);
  }

  // out(i, j) = w0 in(i - m, j + m) + w1 in(i - m - 1, j + m + 1), indices mod N.
  void apply_taps(const std::vector<Tap>& taps, const cplx* in, cplx* out) const {
    const std::size_t mask = N - 1;
    for (std::size_t i = 0; i < N; ++i) {
      cplx* row = out + i * N;
      for (std::size_t j = 0; j < N; ++j) {
        const Tap& t = taps[i - j + N - 1];
        const std::size_t a = (i - static_cast<std::size_t>(t.shift)) & mask;
        const std::size_t b = (j + static_cast<std::size_t>(t.shift)) & mask;
        cplx v = t.w0 * in[a * N + b];
        if (t.w1 != 0.0) v += t.w1 * in[((a - 1) & mask) * N + ((b + 1) & mask)];
        row[j] = v;
      }
    }
  }

  void apply_decoherence_only(cplx* data, const std::vector<Tap>& taps) const {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) data[i * N + j] *= taps[i - j + N - 1].w0;
  }

  bool decohere() const { return params.enable_decoherence && env.decoherence_rate > 0.0; }

  // Position-space pass; the result may land in the other buffer.
  void position_pass(const std::vector<Tap>& taps, cplx*& rho, cplx*& tmp) const {
    if (friction) {
      apply_taps(taps, rho, tmp);
      std::swap(rho, tmp);
    } else if (decohere()) {
      apply_decoherence_only(rho, taps);
    }
  }

  void first_half(cplx*& rho, cplx*& tmp) const {
    position_pass(pre, rho, tmp);
    if (friction)
      for (int s = 1; s < params.friction_substeps; ++s) position_pass(mid, rho, tmp);
  }

  void second_half(cplx*& rho, cplx*& tmp) const {
    if (friction)
      for (int s = 1; s < params.friction_substeps; ++s) position_pass(mid, rho, tmp);
    position_pass(post, rho, tmp);
  }

  // rho <- U rho U^dagger. Rows of rho take conj(U) (the x' factor); the
  // conjugate transpose turns the x factor into conj(U) on rows again. The
  // second pass yields (U rho U^dagger)^dagger, which is the result itself
  // for Hermitian rho, so the closing transpose is skipped.
  void kinetic_pass(cplx*& rho, cplx*& tmp) const {
    if (!params.enable_kinetic) return;
    row_propagate(rho);
    conjugate_transpose(rho, tmp);
    row_propagate(tmp);
    std::swap(rho, tmp);
  }

  double trace_of(const cplx* rho) const {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += rho[i * N + i].real();
    return s * params.dx();
  }

  /// `steps` Strang steps; adjacent position-space halves are merged. The
  /// diagonal is untouched by those passes, so on_step sees the exact trace.
  template <typename OnStep>
  void run(DensityGrid& g, std::size_t steps, OnStep&& on_step) {
    if (steps == 0) return;
    cplx* rho = g.values.data();
    cplx* tmp = scratch;
    const bool fuse = params.friction_substeps == 1;
    first_half(rho, tmp);
    for (std::size_t s = 1; s <= steps; ++s) {
      kinetic_pass(rho, tmp);
      if (s == steps) {
        second_half(rho, tmp);
      } else if (fuse) {
        position_pass(between, rho, tmp);
      } else {
        second_half(rho, tmp);
        first_half(rho, tmp);
      }
      on_step(s, trace_of(rho));
    }
    if (rho != g.values.data()) std::memcpy(static_cast<void*>(g.values.data()), rho, sizeof(cplx) * N * N);
  }
};

Propagator::Propagator(const SolverParams& params, const OracleEnvironment& env) {
  check_params(params);
  check_env(env);
  impl_ = std::make_unique<Impl>(params, env);
}

Propagator::~Propagator() = default;

void Propagator::step_checks(const DensityGrid& grid, double dt) const {
  if (grid.n != impl_->N || grid.values.size() != grid.n * grid.n) {
    throw InvalidParameter("grid size does not match the propagator");
  }
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidParameter("time step must be >= 0");
  if (std::abs(grid.dx - impl_->params.dx()) > 1e-12 * impl_->params.dx()) {
    throw InvalidParameter("grid spacing does not match the solver parameters");
  }
}

void Propagator::step(DensityGrid& grid, double dt) {
  step_checks(grid, dt);
  if (dt == 0.0) return;
  impl_->prepare(dt);
  dt_ = dt;
  impl_->run(grid, 1, [](std::size_t, double) {});
  grid.t += dt;
}

void Propagator::advance(DensityGrid& grid, double dt, std::size_t steps) {
  if (steps == 0) return;
  step_checks(grid, dt);
  impl_->prepare(dt);
  dt_ = dt;
  const double t0 = grid.t;
  impl_->run(grid, steps, [&](std::size_t s, double tr) {
    if (!std::isfinite(tr) || std::abs(tr) > 1e100) {
      std::ostringstream os;
      os << "oracle diverged at step " << s << " (t = " << t0 + dt * static_cast<double>(s) << ")";
      throw NumericalError(os.str());
    }
  });
  grid.t = t0 + dt * static_cast<double>(steps);
}

void step(DensityGrid& grid, double dt, const SolverParams& params, const OracleEnvironment& env) {
  Propagator p(params, env);
  p.step(grid, dt);
}

// ---------------------------------------------------------------------------
// Evolution and diagnostics

EvolutionReport evolve(DensityGrid& grid, double t_final, const SolverParams& params, const OracleEnvironment& env,
                       const StepObserver& observer) {
  if (!std::isfinite(t_final) || t_final < grid.t) throw InvalidParameter("t_final must be >= current time");
  EvolutionReport rep;
  rep.trace_initial = grid.trace();
  const double span = t_final - grid.t;
  std::size_t steps = 0;
  if (span > 0.0) steps = static_cast<std::size_t>(std::ceil(span / params.dt - 1e-9));
  if (span > 0.0 && steps == 0) steps = 1;
  rep.steps = steps;
  rep.dt_used = steps ? span / static_cast<double>(steps) : 0.0;
  rep.within_accuracy_cap = rep.dt_used <= 1e-3 * t_final * (1.0 + 1e-9);

  if (steps > 0) {
    Propagator prop(params, env);
    const double t0 = grid.t;
    if (!observer) prop.advance(grid, rep.dt_used, steps);
    for (std::size_t s = 0; observer && s < steps; ++s) {
      prop.step(grid, rep.dt_used);
      grid.t = t0 + rep.dt_used * static_cast<double>(s + 1);
      const double tr = grid.trace();
      if (!std::isfinite(tr) || std::abs(tr) > 1e100) {
        std::ostringstream os;
        os << "oracle diverged at step " << s + 1 << " (t = " << grid.t << ")";
        throw NumericalError(os.str());
      }
      if (observer) observer(grid, s + 1);
    }
    grid.t = t_final;
  }
  for (const auto& v : grid.values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("oracle produced non-finite values by step " + std::to_string(steps));
    }
  }

  rep.trace_final = grid.trace();
  rep.trace_drift = std::abs(rep.trace_final - rep.trace_initial);
  rep.hermiticity_error = grid.hermiticity_error();
  double dmin = grid.n ? grid(0, 0).real() : 0.0, dmax = 0.0, total = 0.0, edge = 0.0;
  const std::size_t band = std::max<std::size_t>(1, grid.n / 16);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double v = grid(i, i).real();
    dmin = std::min(dmin, v);
    dmax = std::max(dmax, v);
    total += std::abs(v);
    if (i < band || i >= grid.n - band) edge += std::abs(v);
  }
  rep.min_diagonal_relative = dmax > 0.0 ? dmin / dmax : 0.0;
  rep.boundary_mass = total > 0.0 ? edge / total : 0.0;
  return rep;
}

IntensityProfile diagonal(const DensityGrid& grid) {
  IntensityProfile p;
  p.t = grid.t;
  p.x.resize(grid.n);
  p.intensity.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    p.x[i] = grid.x(i);
    p.intensity[i] = grid(i, i).real();
  }
  return p;
}

double diagonal_imaginary_ratio(const DensityGrid& grid) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    re = std::max(re, std::abs(grid(i, i).real()));
    im = std::max(im, std::abs(grid(i, i).imag()));
  }
  return re > 0.0 ? im / re : im;
}

ComparisonReport compare_to_analytic(const DensityGrid& grid, const ExperimentConfig& cfg, const Bath& bath,
                                     double t_s, double tolerance) {
  const double tf = flight_time(cfg);
  if (std::abs(grid.t * tf - t_s) > 1e-9 * std::max(tf, t_s)) {
    std::ostringstream os;
    os << "grid time " << grid.t * tf << " s does not match requested t = " << t_s << " s";
    throw InvalidParameter(os.str());
  }
  if (grid.n == 0) throw InvalidParameter("empty density grid");
  const double l = cfg.slits.spacing_m;
  std::vector<double> xs(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) xs[i] = grid.x(i) * l;
  const auto ref = pattern(cfg, t_s, bath, EvaluationMode::exact, xs, Normalization::raw);
  const auto num = diagonal(grid);

  const double rmax = ref.max();
  const double nmax = num.max();
  if (!(rmax > 0.0) || !(nmax > 0.0)) throw NumericalError("cannot peak-normalize a non-positive profile");
  double diff2 = 0.0, ref2 = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double a = num.intensity[i] / nmax;
    const double b = ref.intensity[i] / rmax;
    diff2 += (a - b) * (a - b);
    ref2 += b * b;
    sup = std::max(sup, std::abs(a - b));
  }
  ComparisonReport rep;
  rep.relative_l2 = std::sqrt(diff2 / ref2);
  rep.sup = sup;
  rep.tolerance = tolerance;
  rep.passed = rep.relative_l2 <= tolerance;
  return rep;
}

OracleSetup make_oracle_setup(int slits, double eps_hat, double phi, double gamma_hat, double kappa,
                              DetectorMode mode) {
  if (slits < 1) throw InvalidParameter("need at least one slit");
  if (!(eps_hat > 0.0) || !(phi > 0.0) || !(gamma_hat >= 0.0) || !(kappa >= 0.0)) {
    throw InvalidParameter("oracle instance needs eps_hat > 0, phi > 0, gamma_hat >= 0, kappa >= 0");
  }
  // Any consistent SI embedding works; these keep every quantity O(1) in SI exponents.
  constexpr double l = 1e-6;
  constexpr double m = 1e-26;
  constexpr double L = 0.1;
  OracleSetup s;
  auto& cfg = s.cfg;
  cfg.quanton = {m, 2.0 * std::numbers::pi * l * l / (phi * L)};
  cfg.slits = {slits, l, eps_hat * l};
  cfg.amplitudes = SourceAmplitudes::equal(slits);
  cfg.detector = mode == DetectorMode::orthogonal ? DetectorOverlaps::orthogonal(slits) : DetectorOverlaps::parallel(slits);
  cfg.screen.distance_m = L;
  s.t_final_s = flight_time(cfg);
  const double gamma = gamma_hat / s.t_final_s;
  s.bath = bath_for_kappa(cfg, kappa, s.t_final_s, gamma);
  cfg.environment.gamma_per_s = gamma;
  cfg.environment.temperature_K = gamma > 0.0 ? s.bath.diffusion / (2.0 * m * gamma * constants::k_B) : 0.0;
  const double half = required_half_width(cfg, s.bath, s.t_final_s) * l;
  cfg.screen.x_min_m = cfg.slits.center() - half;
  cfg.screen.x_max_m = cfg.slits.center() + half;
  cfg.screen.points = 2001;
  s.env = OracleEnvironment::from(nondimensionalize(cfg, s.bath, s.t_final_s));
  return s;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[4] = {'D', 'G', 'R', 'D'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw InvalidParameter("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_checkpoint(const DensityGrid& grid, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidParameter("cannot write checkpoint " + path.string());
  os.write(kMagic, 4);
  put_le<std::uint32_t>(os, kCheckpointVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.n));
  put_le<double>(os, grid.dx);
  put_le<double>(os, grid.t);
  for (const auto& v : grid.values) {
    put_le<double>(os, v.real());
    put_le<double>(os, v.imag());
  }
  if (!os) throw InvalidParameter("failed writing checkpoint " + path.string());
}

DensityGrid read_checkpoint(const std::filesystem::path& path, double x0) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidParameter("cannot open checkpoint " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw InvalidParameter("not a DGRD checkpoint");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw InvalidParameter("unsupported checkpoint version " + std::to_string(version));
  DensityGrid g;
  g.n = get_le<std::uint32_t>(is);
  if (!is_power_of_two(g.n)) throw InvalidParameter("checkpoint grid size is not a power of two");
  g.dx = get_le<double>(is);
  g.t = get_le<double>(is);
  g.x0 = x0;
  g.values.resize(g.n * g.n);
  for (auto& v : g.values) {
    const double re = get_le<double>(is);
    const double im = get_le<double>(is);
    v = {re, im};
  }
  return g;
}

}  // namespace decolab
