#pragma once

#include <vector>

#include "fdl/propagator.hpp"
#include "fdl/selfaffine.hpp"

namespace fdl {

enum class Method { Lie, Strang };

// Time stepping lives on the b-adic grid of the curve: dt = b^-time_level and
// every dispersion increment X(t_{j+1}) - X(t_j) comes from exact integers.
struct SolverConfig {
  double sigma = 1.0;
  double lambda = 0.0;
  double T = 1.0;
  int time_level = 4;
  Method method = Method::Strang;
};

struct TraceRow {
  i64 step = 0;
  double t = 0.0;
  double mass = 0.0;
  double peak = 0.0;
  double grad_norm = 0.0;
};

enum class RunStatus { Completed, NanDetected };

struct RunTrace {
  std::vector<TraceRow> rows;  // left endpoints, one row per step
  double mixed_norm = 0.0;     // discrete L^r([0,T]; L^{2 sigma + 2})
  double r = 0.0;
  bool blowup_flag = false;    // peak or gradient grew past 10x initial
};

struct EvolveResult {
  WaveField psi;
  RunTrace trace;
  RunStatus status = RunStatus::Completed;
};

// r with (r, 2 sigma + 2) admissible for order h: r = 2(2 sigma + 2)/(d h
// sigma). criticality_ratio returns (2 sigma + 2)/r = d h sigma / 2; the
// problem is subcritical when it is below 1.
double admissible_r(double sigma, int d, double h);
double criticality_ratio(double sigma, int d, double h);

// |grad psi|_2 via the spectrum.
double grad_norm(const WaveField& f);

// Exact pointwise flow of i psi_t = lambda |psi|^{2 sigma} psi over dt:
// psi -> psi exp(-i lambda |psi|^{2 sigma} dt). Modulus preserved exactly.
WaveField nonlinear_phase_step(const WaveField& f, double dt, double sigma,
                               double lambda);

void validate_config(const SolverConfig& cfg, const Curve& c);

// T b^time_level, the number of steps; validate_config requires it integral.
i64 step_count(const SolverConfig& cfg, const Curve& c);

// Split-step evolution. Lie: nonlinear dt, then propagator over the exact
// curve increment. Strang: half, full, half. A non-finite diagnostic stops
// the run and returns the partial trace with status NanDetected.
EvolveResult evolve(const WaveField& psi0, const Curve& c,
                    const SolverConfig& cfg);

struct PicardResult {
  std::vector<WaveField> sequence;  // iterate at t_j, j = 0..steps
  std::vector<double> distances;    // successive mixed-norm gaps
  double r = 0.0;
};

// Fixed-point iteration of the discrete Duhamel map, prefix-summed in
// frequency so each sweep costs O(b^n) transforms. Throws Divergence after
// three consecutive growing distances.
PicardResult picard_iterate(const WaveField& psi0, const Curve& c,
                            const SolverConfig& cfg, int iterations);

struct ScanRow {
  double sigma = 0.0;
  bool control = false;  // constant-dispersion identity curve
  double peak_growth = 0.0;
  double grad_growth = 0.0;
  double mass_drift = 0.0;
  RunStatus status = RunStatus::Completed;
};

// evolve per sigma on the modulated curve and on the identity-curve control
// with identical data; a NaN is recorded in the row and the scan continues.
std::vector<ScanRow> criticality_scan(const WaveField& psi0,
                                      const Curve& modulated,
                                      const SolverConfig& base,
                                      const std::vector<double>& sigmas);

}  // namespace fdl
