#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdl/selfaffine.hpp"

namespace fdl {

// Exponent bundle for the fractional double-integral inequality. The
// relation 2 - alpha*h = 1/p + 1/q is enforced on construction; h is the
// order the exponents were derived for and is carried along so experiments
// can deliberately pair them with a curve of a different order.
struct HlsExponents {
  double alpha;
  double p;
  double q;
  double h;
};

HlsExponents make_exponents(double alpha, double h, double p, double q);
// p = q = 2/(2 - alpha*h)
HlsExponents symmetric_exponents(double alpha, double h);

// Left-endpoint step function on the level-n grid: samples[j] = f(j b^-n),
// b^n samples total.
struct StepFunction {
  int level = 0;
  std::vector<double> samples;
};

StepFunction step_constant(const Curve& c, double value);
// indicator of [0, b^-scale_m); 1 <= scale_m <= level
StepFunction step_indicator(const Curve& c, int scale_m);
// t^-beta clipped at the first grid point: f_0 = f_1 = b^(level*beta)
StepFunction step_power(const Curve& c, double beta);
// i.i.d. uniform [0,1] samples, reproducible from (seed, stream)
StepFunction step_random(const Curve& c, std::uint64_t seed,
                         std::uint64_t stream);

// (b^-n sum |f_j|^p)^(1/p)
double norm_p(const StepFunction& f, double p);

// Exact integral of |X_t - X_s|^-alpha against the piecewise-linear
// interpolant over cell [t_k, t_k+1] x [t_l, t_l+1]. The integer second
// difference is formed before any floating-point exponentiation.
double iota_closed_form(const Curve& c, i64 k, i64 l, double alpha);

// Independent oracle for the cell integral of (|X_t - X_s| + eps)^-alpha.
// Cells whose crossing set X_t = X_s meets the cell are split along it and
// integrated exactly by triangle moments (eps = 0 only); all other cells use
// adaptive tensor Gauss quadrature refined dyadically until the requested
// relative tolerance holds.
double iota_quadrature(const Curve& c, i64 k, i64 l, double alpha, double eps,
                       double rel_tol = 1e-8);

struct IotaMatrix {
  int level = 0;
  i64 n = 0;  // intervals per axis
  std::vector<double> entries;  // row-major n*n

  double at(i64 k, i64 l) const {
    return entries[static_cast<std::size_t>(k * n + l)];
  }
};

// Dense cell-integral table; refused above 2^24 entries.
IotaMatrix iota_matrix(const Curve& c, double alpha);

// sum_{j,k} f_j g_k iota_{j,k}. Groups cells by integer endpoint values, so
// the cost is O(b^n + V^2) for value range V instead of O(b^2n); large V
// switches the difference histogram to an FFT correlation.
double hls_sum(const StepFunction& f, const StepFunction& g, const Curve& c,
               double alpha);
// Plain double loop over cells, deterministically reduced. Kept as the
// reference the fast path is tested against.
double hls_sum_reference(const StepFunction& f, const StepFunction& g,
                         const Curve& c, double alpha);

// hls_sum / (|f|_p |g|_q); 0 when a norm vanishes (the sum then vanishes
// too for nonnegative inputs).
double hls_ratio(const StepFunction& f, const StepFunction& g, const Curve& c,
                 const HlsExponents& e);

struct WorstCaseRow {
  int level = 0;
  double max_ratio = 0.0;
  std::string argmax_id;
};

struct WorstCaseReport {
  double max_ratio = 0.0;
  std::string argmax_id;
  int argmax_level = 0;
  std::vector<WorstCaseRow> rows;
};

// Sup of hls_ratio over a deterministic candidate set: constants, b-adic
// indicators at every scale, truncated power profiles near the critical
// exponent, and `trials` random pairs drawn from the seed. Levels 1..n when
// the curve is pattern-built, otherwise just the curve's own level.
WorstCaseReport worst_case_search(const Curve& c, const HlsExponents& e,
                                  int trials, std::uint64_t seed);

struct ScalingRow {
  int level = 0;
  double max_iota = 0.0;
  double normalized = 0.0;  // max_iota * b^(n(2 - H*alpha))
};

// Per-level maxima of the cell integrals, normalized by the scaling the
// order predicts. Cells are grouped by (value, increment) type pairs, so
// pattern-built curves cost O(a^2n) per level instead of O(b^2n).
std::vector<ScalingRow> scaling_check(const Curve& c, double alpha);

}  // namespace fdl
