#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fdl/errors.hpp"
#include "fdl/nls.hpp"
#include "fdl/propagator.hpp"
#include "fdl/selfaffine.hpp"

using namespace fdl;

namespace {

Curve default_curve(int level) { return build(default_pattern(), level); }

double diff_l2(const WaveField& a, const WaveField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s * std::pow(a.grid.dx(), a.grid.d));
}

}  // namespace

TEST_CASE("admissibility bookkeeping for the nonlinear exponent") {
  CHECK(admissible_r(3.0, 1, 0.5) == doctest::Approx(32.0 / 3.0).epsilon(1e-15));
  CHECK(criticality_ratio(3.0, 1, 0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(criticality_ratio(4.0, 1, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(criticality_ratio(2.0, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double sigma : {0.5, 1.0, 3.0}) {
    for (double h : {0.5, 1.0}) {
      const double r = admissible_r(sigma, 1, h);
      CHECK_NOTHROW(make_pair(r, 2.0 * sigma + 2.0, h, 1));
    }
  }
  CHECK_THROWS_AS(admissible_r(0.0, 1, 0.5), Error);
  CHECK_THROWS_AS(admissible_r(1.0, 3, 0.5), Error);
}

TEST_CASE("nonlinear phase step is an exact pointwise flow") {
  SpatialGrid g = make_grid(1, 128, 16.0);
  WaveField f = random_field(g, 31, 0);

  WaveField same = nonlinear_phase_step(f, 0.25, 2.0, 0.0);
  bool identical = true;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    identical = identical && same.values[i] == f.values[i];
  CHECK(identical);

  WaveField constant = make_field(g);
  const std::complex<double> c0(0.6, -0.3);
  for (auto& v : constant.values) v = c0;
  const double dt = 0.125, sigma = 1.5, lambda = -1.0;
  WaveField stepped = nonlinear_phase_step(constant, dt, sigma, lambda);
  const double ph = -lambda * std::pow(std::norm(c0), sigma) * dt;
  const std::complex<double> expect =
      c0 * std::complex<double>(std::cos(ph), std::sin(ph));
  for (const auto& v : stepped.values)
    REQUIRE(std::abs(v - expect) <= 1e-15);

  WaveField turned = nonlinear_phase_step(f, 0.5, 3.0, -1.0);
  double mod_dev = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    mod_dev = std::max(
        mod_dev, std::abs(std::abs(turned.values[i]) - std::abs(f.values[i])));
  CHECK(mod_dev <= 1e-15 * norm_sup(f));

  CHECK_THROWS_AS(nonlinear_phase_step(f, -0.1, 1.0, 1.0), Error);
}

TEST_CASE("configuration validation pins the time grid to the curve") {
  Curve c = default_curve(5);
  SolverConfig cfg;
  cfg.time_level = 4;
  CHECK_NOTHROW(validate_config(cfg, c));
  CHECK(step_count(cfg, c) == 256);
  cfg.T = 0.25;
  CHECK(step_count(cfg, c) == 64);

  SolverConfig bad = cfg;
  bad.T = 0.0;
  CHECK_THROWS_AS(validate_config(bad, c), Error);
  bad.T = 1.5;
  CHECK_THROWS_AS(validate_config(bad, c), Error);
  bad.T = 1.0 / 3.0;
  CHECK_THROWS_AS(validate_config(bad, c), Error);
  bad = cfg;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(validate_config(bad, c), Error);
  bad = cfg;
  bad.time_level = 0;
  CHECK_THROWS_AS(validate_config(bad, c), Error);
  bad = cfg;
  bad.time_level = 6;
  CHECK_THROWS_AS(validate_config(bad, c), Error);
  try {
    validate_config(bad, c);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MismatchedLevel);
  }
}

TEST_CASE("with no coupling the split steps telescope to one propagator") {
  SpatialGrid g = make_grid(1, 256, 64.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  Curve c = default_curve(6);
  const WaveField reference = apply_propagator(psi0, 1.0);  // X(1) - X(0)
  const double l2 = norm_l2(psi0);
  for (Method m : {Method::Lie, Method::Strang}) {
    SolverConfig cfg;
    cfg.sigma = 3.0;
    cfg.lambda = 0.0;
    cfg.time_level = 6;
    cfg.method = m;
    EvolveResult res = evolve(psi0, c, cfg);
    CHECK(res.status == RunStatus::Completed);
    CHECK(res.trace.rows.size() == 4096);
    CHECK(diff_l2(res.psi, reference) <= 1e-12 * l2);
  }
}

TEST_CASE("mass is conserved through a focusing run") {
  SpatialGrid g = make_grid(1, 256, 64.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  Curve c = default_curve(6);
  SolverConfig cfg;
  cfg.sigma = 3.0;
  cfg.lambda = -1.0;
  cfg.time_level = 6;
  cfg.method = Method::Strang;
  EvolveResult res = evolve(psi0, c, cfg);
  REQUIRE(res.status == RunStatus::Completed);
  const double m0 = res.trace.rows.front().mass;
  double drift = 0.0;
  for (const TraceRow& row : res.trace.rows)
    drift = std::max(drift, std::abs(row.mass - m0) / m0);
  const double fl2 = norm_l2(res.psi);
  drift = std::max(drift, std::abs(fl2 * fl2 - m0) / m0);
  CHECK(drift <= 1e-10);
  CHECK(res.trace.r == doctest::Approx(32.0 / 3.0).epsilon(1e-15));
  CHECK(res.trace.mixed_norm > 0.0);
  CHECK(res.trace.rows[5].t == 5.0 / 4096.0);
  CHECK_FALSE(res.trace.blowup_flag);
}

TEST_CASE("a non-finite state stops the run with the partial trace") {
  SpatialGrid g = make_grid(1, 64, 16.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  psi0.values[3] = std::complex<double>(
      std::numeric_limits<double>::infinity(), 0.0);
  Curve c = default_curve(4);
  SolverConfig cfg;
  cfg.time_level = 3;
  EvolveResult res = evolve(psi0, c, cfg);
  CHECK(res.status == RunStatus::NanDetected);
  CHECK(res.trace.rows.size() == 1);
}

TEST_CASE("split-step solutions self-converge as the grid refines") {
  SpatialGrid g = make_grid(1, 128, 32.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  Curve c = default_curve(6);
  std::vector<WaveField> finals;
  for (int n : {4, 5, 6}) {
    SolverConfig cfg;
    cfg.sigma = 3.0;
    cfg.lambda = -1.0;
    cfg.time_level = n;
    cfg.method = Method::Strang;
    finals.push_back(evolve(psi0, c, cfg).psi);
  }
  const double d45 = diff_l2(finals[0], finals[1]);
  const double d56 = diff_l2(finals[1], finals[2]);
  CHECK(d56 < d45);
}

TEST_CASE("with no coupling the fixed-point map converges immediately") {
  SpatialGrid g = make_grid(1, 128, 32.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  Curve c = default_curve(4);
  SolverConfig cfg;
  cfg.sigma = 3.0;
  cfg.lambda = 0.0;
  cfg.time_level = 4;
  PicardResult res = picard_iterate(psi0, c, cfg, 3);
  REQUIRE(res.distances.size() == 3);
  for (double d : res.distances) CHECK(d == 0.0);
  REQUIRE(res.sequence.size() == 257);
  // each slice is the bare propagator at the exact curve value
  const double scale = 16.0;  // a^level at level 4
  for (std::size_t j : {std::size_t{0}, std::size_t{100}, std::size_t{256}}) {
    const double tau =
        static_cast<double>(coarse_value(c, 4, static_cast<i64>(j))) / scale;
    WaveField ref = apply_propagator(psi0, tau);
    CHECK(diff_l2(res.sequence[j], ref) <= 1e-13 * norm_l2(psi0));
  }
  CHECK_THROWS_AS(picard_iterate(psi0, c, cfg, 0), Error);
}

TEST_CASE("the fixed-point map contracts on a short window") {
  SpatialGrid g = make_grid(1, 256, 64.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  Curve c = default_curve(6);
  SolverConfig cfg;
  cfg.sigma = 3.0;
  cfg.lambda = -1.0;
  cfg.T = 0.25;
  cfg.time_level = 6;
  PicardResult res = picard_iterate(psi0, c, cfg, 8);
  REQUIRE(res.distances.size() == 8);
  // distances fall strictly and every consecutive ratio certifies the
  // contraction; the ratios themselves oscillate, so only their bound gates
  int good = 0;
  for (std::size_t k = 1; k < res.distances.size(); ++k) {
    REQUIRE(res.distances[k - 1] > 0.0);
    CHECK(res.distances[k] < res.distances[k - 1]);
    if (res.distances[k] / res.distances[k - 1] <= 0.5) ++good;
  }
  CHECK(good >= 5);
}

TEST_CASE("fixed point and split-step solution approach each other") {
  SpatialGrid g = make_grid(1, 128, 32.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  Curve c = default_curve(6);
  std::vector<double> gaps;
  for (int n : {3, 4, 5}) {
    SolverConfig cfg;
    cfg.sigma = 3.0;
    cfg.lambda = -1.0;
    cfg.T = 0.25;
    cfg.time_level = n;
    cfg.method = Method::Strang;
    PicardResult fp = picard_iterate(psi0, c, cfg, 20);
    EvolveResult ev = evolve(psi0, c, cfg);
    gaps.push_back(diff_l2(fp.sequence.back(), ev.psi));
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("criticality scan emits one row per exponent and control") {
  SpatialGrid g = make_grid(1, 64, 32.0);
  WaveField psi0 = gaussian_field(g, 1.0);
  Curve c = default_curve(4);
  SolverConfig base;
  base.lambda = -1.0;
  base.time_level = 4;
  const std::vector<double> sigmas{1.0, 3.0};
  std::vector<ScanRow> rows = criticality_scan(psi0, c, base, sigmas);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].sigma == sigmas[i / 2]);
    CHECK(rows[i].control == (i % 2 == 1));
    CHECK(rows[i].status == RunStatus::Completed);
    CHECK(rows[i].mass_drift <= 1e-10);
    CHECK(rows[i].peak_growth >= 1.0);
  }
  std::vector<ScanRow> again = criticality_scan(psi0, c, base, sigmas);
  bool identical = true;
  for (std::size_t i = 0; i < rows.size(); ++i)
    identical = identical && rows[i].peak_growth == again[i].peak_growth &&
                rows[i].grad_growth == again[i].grad_growth &&
                rows[i].mass_drift == again[i].mass_drift;
  CHECK(identical);

  SolverConfig free = base;
  free.lambda = 0.0;
  std::vector<ScanRow> flat = criticality_scan(psi0, c, free, {2.0});
  for (const ScanRow& row : flat) {
    CHECK(row.peak_growth <= 1.0 + 1e-10);
    CHECK(row.grad_growth <= 1.0 + 1e-10);
    CHECK(row.mass_drift <= 1e-10);
  }

  CHECK_THROWS_AS(criticality_scan(psi0, c, base, {}), Error);
}
