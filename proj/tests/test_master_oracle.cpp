#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "decolab/errors.hpp"
#include "decolab/master_oracle.hpp"
#include "test_support.hpp"

using namespace decolab;
using decolab::test::rel_diff;

namespace {

// Centred on the slit array, grid points land on x = 1 and x = 2.
SolverParams small_params(std::size_t N = 256, double half_width = 4.0) {
  SolverParams p;
  p.N = N;
  p.center = 1.5;
  p.half_width = half_width;
  return p;
}

std::size_t index_of(const DensityGrid& g, double x) {
  return static_cast<std::size_t>(std::lround((x - g.x0) / g.dx));
}

double l2_diff(const DensityGrid& a, const DensityGrid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s) * a.dx;
}

}  // namespace

TEST_SUITE("master_oracle") {

TEST_CASE("initial density") {
  const auto params = small_params();
  const auto one = make_oracle_setup(1, 0.25, 4 * std::numbers::pi, 0.0, 0.0);
  const auto g1 = init_density(one.cfg, params);
  CHECK(g1.trace() == doctest::Approx(1.0).epsilon(1e-14));
  // Rank one: every 2x2 minor vanishes.
  const std::size_t a = index_of(g1, 0.9), b = index_of(g1, 1.1);
  CHECK(std::abs(g1(a, a) * g1(b, b) - g1(a, b) * g1(b, a)) < 1e-12 * std::norm(g1(a, a)));

  const auto two = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 0.0, 0.0);
  const auto perp = init_density(two.cfg, DetectorMode::orthogonal, params);
  const std::size_t i1 = index_of(perp, 1.0), i2 = index_of(perp, 2.0);
  CHECK(std::abs(perp.x(i1) - 1.0) < 1e-12);
  CHECK(std::abs(perp.x(i2) - 2.0) < 1e-12);
  const auto par = init_density(two.cfg, DetectorMode::parallel, params);
  // Only the overlap tails of each slit's own Gaussian survive off the diagonal.
  CHECK(std::abs(perp(i1, i2)) < 1e-5 * std::abs(par(i1, i2)));
  CHECK(perp(i1, i2) == perp(i2, i1));
  const double geo = std::sqrt(par(i1, i1).real() * par(i2, i2).real());
  CHECK(std::abs(std::abs(par(i1, i2)) - geo) <= 1e-10 * geo);
  CHECK(par.hermiticity_error() <= 1e-15);

  // Two humps at x = 1 and 2.
  const auto d = diagonal(par);
  std::size_t left = 0, right = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.x[i] < 1.5 && d.intensity[i] > d.intensity[left]) left = i;
    if (d.x[i] >= 1.5 && d.intensity[i] > d.intensity[right]) right = i;
  }
  CHECK(left == i1);
  CHECK(right == i2);
  CHECK(diagonal_imaginary_ratio(par) == 0.0);
}

TEST_CASE("under-resolved grids are rejected by scale") {
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 0.0, 0.0);
  try {
    init_density(s.cfg, small_params(128));
    FAIL("expected a resolution error");
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("slit width") != std::string::npos);
  }
  const auto fine = make_oracle_setup(2, 0.25, 400 * std::numbers::pi, 0.0, 0.0);
  try {
    init_density(fine.cfg, small_params(256));
    FAIL("expected a resolution error");
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("fringe") != std::string::npos);
  }
  auto bad = small_params();
  bad.N = 300;
  CHECK_THROWS_AS(init_density(s.cfg, bad), InvalidParameter);
}

TEST_CASE("free evolution follows the Gaussian spreading law") {
  const double eps = 0.25, phi = 4 * std::numbers::pi;
  const auto s = make_oracle_setup(1, eps, phi, 0.0, 0.0);
  auto params = small_params(256, 4.0);
  params.center = 1.0;
  params.dt = 0.05;
  auto g = init_density(s.cfg, params);
  const auto rep = evolve(g, 1.0, params, s.env);
  CHECK(rep.steps == 20);
  // rho(x, x, t) = exp(-2 (x - 1)^2 / a) / sqrt(pi a / 2) with a = eps^2 + (2 t / (phi eps))^2.
  const double spread = 2.0 / (phi * eps);
  const double a = eps * eps + spread * spread;
  double worst = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double d = g.x(i) - 1.0;
    const double exact = std::exp(-2.0 * d * d / a) / std::sqrt(std::numbers::pi * a / 2.0);
    worst = std::max(worst, std::abs(g(i, i).real() - exact));
    peak = std::max(peak, exact);
  }
  CHECK(worst / peak < 1e-8);
}

TEST_CASE("pure decoherence multiplies by the exact pointwise factor") {
  const double kappa = 0.7;
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 0.0, kappa);
  auto params = small_params();
  params.enable_kinetic = false;
  params.enable_friction = false;
  params.dt = 0.01;
  const auto g0 = init_density(s.cfg, params);
  auto g = g0;
  evolve(g, 0.6, params, s.env);
  // Generator D (x - x')^2 / (4 hbar^2) in units where t_flight / tau_d = kappa gives 3 kappa.
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      const double sep = g.x(i) - g.x(j);
      const auto expected = g0(i, j) * std::exp(-3.0 * kappa * sep * sep * 0.6);
      worst = std::max(worst, std::abs(g(i, j) - expected));
    }
  CHECK(worst <= 1e-13 * g0.max_abs());
  CHECK(s.env.decoherence_rate == doctest::Approx(kappa).epsilon(1e-12));
}

TEST_CASE("evolving to the current time is the identity") {
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 1e-3, 0.5);
  const auto params = small_params();
  auto g = init_density(s.cfg, params);
  const auto before = g.values;
  const auto rep = evolve(g, 0.0, params, s.env);
  CHECK(rep.steps == 0);
  CHECK(g.values == before);
  CHECK_THROWS_AS(evolve(g, -0.1, params, s.env), InvalidParameter);
}

TEST_CASE("conservation over 1000 steps") {
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 1e-3, 0.5);
  auto params = small_params(256, 4.0);
  params.dt = 1e-3;
  auto g = init_density(s.cfg, params);
  const auto rep = evolve(g, 1.0, params, s.env);
  CHECK(rep.steps == 1000);
  CHECK(rep.within_accuracy_cap);
  CHECK(rep.trace_final >= 1.0 - 1e-6);
  CHECK(rep.trace_final <= 1.0 + 1e-6);
  CHECK(rep.trace_drift <= 1e-6);
  CHECK(rep.hermiticity_error <= 1e-10);
  CHECK(rep.min_diagonal_relative >= -1e-8);
  CHECK(diagonal_imaginary_ratio(g) <= 1e-10);
}

TEST_CASE("observer sees every step and matches the batched path") {
  // Without friction the fused and per-step splittings are the same product.
  // With friction they are two Strang orderings that differ at O(dt^2).
  for (const double gamma : {0.0, 2e-3}) {
    CAPTURE(gamma);
    const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, gamma, 0.5);
    auto params = small_params();
    params.dt = 0.05;
    auto a = init_density(s.cfg, params);
    auto b = a;
    std::size_t seen = 0;
    evolve(a, 0.5, params, s.env, [&](const DensityGrid&, std::size_t step) { seen = step; });
    evolve(b, 0.5, params, s.env);
    CHECK(seen == 10);
    CHECK(a.t == b.t);
    CHECK(l2_diff(a, b) < (gamma == 0.0 ? 1e-12 : 1e-5));
  }
}

TEST_CASE("second-order convergence in dt") {
  // gamma = 0 subcase; differences between successive halvings give the order.
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 0.0, 2.0);
  auto run = [&](double dt) {
    auto params = small_params();
    params.dt = dt;
    auto g = init_density(s.cfg, params);
    evolve(g, 1.0, params, s.env);
    return g;
  };
  const auto g1 = run(0.05), g2 = run(0.025), g3 = run(0.0125);
  const double e1 = l2_diff(g1, g2), e2 = l2_diff(g2, g3);
  const double order = std::log2(e1 / e2);
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(order >= 1.8);
}

TEST_CASE("comparison against the closed form") {
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 1e-3, 0.5);
  auto params = small_params(256, 4.0);
  params.dt = 0.01;
  auto g = init_density(s.cfg, params);

  const auto at0 = compare_to_analytic(g, s.cfg, s.bath, 0.0);
  CHECK(at0.relative_l2 <= 1e-8);
  CHECK(at0.sup <= 1e-8);
  CHECK(at0.passed);

  evolve(g, 1.0, params, s.env);
  const auto rep = compare_to_analytic(g, s.cfg, s.bath, s.t_final_s);
  CHECK(rep.relative_l2 <= 1e-2);
  CHECK(rep.passed);

  // Negative control: a different slit spacing must fail.
  auto wrong = s.cfg;
  wrong.slits.spacing_m *= 1.3;
  wrong.slits.width_m *= 1.3;
  const auto bad = compare_to_analytic(g, wrong, s.bath, flight_time(wrong));
  CHECK(bad.relative_l2 > 0.1);
  CHECK_FALSE(bad.passed);

  CHECK_THROWS_AS(compare_to_analytic(g, s.cfg, s.bath, 0.5 * s.t_final_s), InvalidParameter);
}

TEST_CASE("friction CFL bound and divergence reporting") {
  const auto params = small_params();
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 0.0, 0.5);
  auto g = init_density(s.cfg, params);
  {
    Propagator stiff(params, OracleEnvironment{4 * std::numbers::pi, 1e4, 0.0});
    CHECK_THROWS_AS(stiff.step(g, 0.01), InvalidParameter);
  }

  g(3, 3) = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  Propagator prop(params, s.env);
  try {
    prop.advance(g, 1e-3, 5);
    FAIL("expected divergence");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip and layout") {
  const auto s = make_oracle_setup(2, 0.25, 4 * std::numbers::pi, 1e-3, 0.5);
  auto params = small_params(256);
  params.dt = 0.05;
  auto g = init_density(s.cfg, params);
  evolve(g, 0.25, params, s.env);
  const auto path = test::temp_path("grid.dgrd");
  write_checkpoint(g, path);
  CHECK(std::filesystem::file_size(path) == 4 + 4 + 4 + 8 + 8 + 16 * g.n * g.n);

  std::ifstream raw(path, std::ios::binary);
  char header[12];
  raw.read(header, 12);
  CHECK(std::memcmp(header, "DGRD", 4) == 0);
  CHECK(static_cast<unsigned char>(header[4]) == 1);
  CHECK(static_cast<unsigned char>(header[9]) == 1);  // 256 little-endian: 00 01 00 00
  raw.close();

  const auto back = read_checkpoint(path, g.x0);
  CHECK(back.n == g.n);
  CHECK(back.dx == g.dx);
  CHECK(back.t == g.t);
  CHECK(back.values == g.values);
  std::filesystem::remove(path);

  const auto junk = test::temp_path("junk.dgrd");
  std::ofstream(junk) << "not a grid";
  CHECK_THROWS_AS(read_checkpoint(junk), InvalidParameter);
  std::filesystem::remove(junk);
}

}  // TEST_SUITE
