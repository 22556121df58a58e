#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "decolab/constants.hpp"
#include "decolab/errors.hpp"
#include "decolab/physical_model.hpp"
#include "test_support.hpp"

using namespace decolab;
using decolab::test::rel_diff;

TEST_SUITE("physical_model") {

TEST_CASE("presets carry the published parameters") {
  const auto neon = load_preset("neon");
  CHECK(neon.slits.spacing_m == 6e-6);
  CHECK(neon.quanton.mass_kg == 3.349e-26);
  CHECK(neon.environment.temperature_K == 2.5e-3);
  CHECK(neon.quanton.wavelength_m == 0.018e-6);
  CHECK(neon.screen.distance_m == 37e-3);
  CHECK(neon.slit_count() == 4);

  const auto c60 = load_preset("c60");
  CHECK(c60.screen.distance_m == 1.25);
  CHECK(c60.quanton.mass_kg == 1.2e-24);
  CHECK(c60.environment.temperature_K == 900.0);
  CHECK(c60.quanton.wavelength_m == 2.5e-12);
  CHECK(c60.slits.spacing_m == 100e-9);

  CHECK_THROWS_AS(load_preset("xenon"), InvalidParameter);
  try {
    load_preset("xenon");
  } catch (const InvalidParameter& e) {
    const std::string msg = e.what();
    CHECK(msg.find("neon") != std::string::npos);
    CHECK(msg.find("c60") != std::string::npos);
  }
}

TEST_CASE("presets validate cleanly and sit deep in the Fraunhofer regime") {
  for (const auto& name : preset_names()) {
    const auto cfg = load_preset(name);
    CHECK(validate(cfg).empty());
    CHECK(fraunhofer_number(cfg) < kFraunhoferWarning);
    // Screen window centred on the slit array.
    CHECK(std::abs(0.5 * (cfg.screen.x_min_m + cfg.screen.x_max_m) - cfg.slits.center()) < 1e-15);
  }
}

TEST_CASE("validation reports named violations") {
  auto cfg = load_preset("neon", 2);
  cfg.amplitudes.magnitudes = {1.0, 1.0};
  auto report = validate(cfg);
  REQUIRE(report.has_errors());
  CHECK(report.first_error()->message.find("amplitude normalization") != std::string::npos);

  auto wide = load_preset("neon");
  wide.slits.width_m = 50e-6;
  report = validate(wide);
  bool fraunhofer = false;
  for (const auto& v : report.violations) fraunhofer |= v.message.find("Fraunhofer") != std::string::npos;
  CHECK(fraunhofer);
  // pi eps^2 / (lambda L) by hand.
  const double f = std::numbers::pi * 50e-6 * 50e-6 / (0.018e-6 * 37e-3);
  CHECK(rel_diff(fraunhofer_number(wide), f) < 1e-14);
  CHECK_THROWS_AS(require_far_field(wide), InvalidParameter);

  auto bad_o = load_preset("neon", 3);
  bad_o.detector = DetectorOverlaps::from_matrix((Eigen::MatrixXd(3, 3) << 1, 1, 0, 1, 1, 1, 0, 1, 1).finished());
  CHECK(validate(bad_o).has_errors());  // not positive semidefinite
}

TEST_CASE("diffusion coefficient") {
  CHECK(diffusion_coefficient(3.349e-26, 0.0, 2.5e-3) == 0.0);
  const double neon = 2.0 * 3.349e-26 * 1.0 * 1.380649e-23 * 2.5e-3;
  CHECK(rel_diff(diffusion_coefficient(3.349e-26, 1.0, 2.5e-3), neon) < 1e-15);
  CHECK(diffusion_coefficient(3.349e-26, 1.0, 2.5e-3) == doctest::Approx(2.312e-51).epsilon(1e-3));
  CHECK(diffusion_coefficient(1.2e-24, 1.0, 900.0) == doctest::Approx(2.982e-44).epsilon(1e-3));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double m = u(rng) * 1e-26, g = u(rng), T = u(rng);
    const double d = diffusion_coefficient(m, g, T);
    CHECK(rel_diff(diffusion_coefficient(2 * m, g, T), 2 * d) < 1e-15);
    CHECK(rel_diff(diffusion_coefficient(m, 2 * g, T), 2 * d) < 1e-15);
    CHECK(rel_diff(diffusion_coefficient(m, g, 2 * T), 2 * d) < 1e-15);
  }
  CHECK_THROWS_AS(diffusion_coefficient(NAN, 1, 1), InvalidParameter);
  CHECK_THROWS_AS(diffusion_coefficient(1e-26, INFINITY, 1), InvalidParameter);
  CHECK_THROWS_AS(diffusion_coefficient(-1e-26, 1, 1), InvalidParameter);
}

TEST_CASE("flight time") {
  CHECK(flight_time(0.018e-6, 37e-3, 3.349e-26) == doctest::Approx(3.366e-2).epsilon(1e-3));
  CHECK(flight_time(2.5e-12, 1.25, 1.2e-24) == doctest::Approx(5.66e-3).epsilon(1e-3));
  CHECK(flight_time(0.018e-6, 0.0, 3.349e-26) == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double lam = u(rng) * 1e-9, L = u(rng), m = u(rng) * 1e-25;
    const double v = constants::h / (m * lam);
    CHECK(rel_diff(flight_time(lam, L, m) * v, L) < 1e-12);
  }
}

TEST_CASE("dimensionless reduction") {
  const auto neon = load_preset("neon");
  const double t = flight_time(neon);
  const auto inst = nondimensionalize(neon, t);
  // 2 pi (6 um)^2 / (0.018 um * 37 mm) by hand.
  const double phi = 2.0 * std::numbers::pi * 36e-12 / (0.018e-6 * 37e-3);
  CHECK(rel_diff(inst.phi, phi) < 1e-14);
  CHECK(inst.phi == doctest::Approx(0.3396).epsilon(1e-3));
  CHECK(inst.x_hat(neon.slits.spacing_m) == doctest::Approx(1.0));
  CHECK(inst.kappa() == 0.0);
  CHECK(inst.t_hat == doctest::Approx(1.0));
  CHECK(inst.eps_hat == doctest::Approx(1.0 / 6.0));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < 100; ++i) {
    auto cfg = load_preset(i % 2 ? "neon" : "c60");
    cfg.environment.gamma_per_s = u(rng) * 10.0;
    cfg.slits.spacing_m *= u(rng);
    const double ti = flight_time(cfg) * u(rng);
    const Bath bath = bath_from_environment(cfg);
    const auto d = nondimensionalize(cfg, bath, ti);
    const auto back = redimensionalize(d);
    CHECK(rel_diff(back.spacing_m, cfg.slits.spacing_m) < 1e-12);
    CHECK(rel_diff(back.width_m, cfg.slits.width_m) < 1e-12);
    CHECK(rel_diff(back.lambda_L, cfg.lambda_L()) < 1e-12);
    CHECK(rel_diff(back.flight_time_s, flight_time(cfg)) < 1e-12);
    CHECK(rel_diff(back.t_s, ti) < 1e-12);
    CHECK(rel_diff(back.gamma_per_s, bath.gamma_per_s) < 1e-12);
    CHECK(rel_diff(back.diffusion, bath.diffusion) < 1e-12);
  }
}

TEST_CASE("bath for a target kappa") {
  const auto cfg = load_preset("c60");
  const double t = flight_time(cfg);
  for (double kappa : {0.0, 0.1, 1.0, 4.0}) {
    const Bath b = bath_for_kappa(cfg, kappa, t);
    const auto inst = nondimensionalize(cfg, b, t);
    CHECK(inst.kappa() == doctest::Approx(kappa).epsilon(1e-12));
  }
  CHECK(std::isinf(decoherence_time(cfg, Bath{})));
  CHECK_THROWS_AS(bath_for_kappa(cfg, -1.0, t), InvalidParameter);
}

TEST_CASE("slit-count and detector helpers") {
  const auto base = load_preset("c60");
  const auto five = with_slit_count(base, 5);
  CHECK(five.slit_count() == 5);
  CHECK(five.amplitudes.norm_squared() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(0.5 * (five.screen.x_min_m + five.screen.x_max_m) - five.slits.center()) < 1e-15);
  CHECK(validate(five).empty());
  const auto perp = with_detector(base, DetectorMode::orthogonal);
  CHECK(perp.detector.overlaps.isIdentity());
  CHECK(with_slit_count(perp, 3).detector.mode == DetectorMode::orthogonal);
  CHECK(parse_detector_mode("matrix") == DetectorMode::matrix);
  CHECK_THROWS_AS(parse_detector_mode("diagonal"), InvalidParameter);
}

TEST_CASE("amplitude phase convention") {
  SourceAmplitudes a{{1.0}, {0.3}};
  const auto c = a.coefficient(0);
  CHECK(c.real() == doctest::Approx(std::cos(0.3)));
  CHECK(c.imag() == doctest::Approx(-std::sin(0.3)));
}

}  // TEST_SUITE
