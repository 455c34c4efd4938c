#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "fdl/selfaffine.hpp"

namespace fdl {

// Periodic box [-L/2, L/2)^d sampled at nx points per axis.
// Frequencies are xi_k = 2 pi k / L with k in [-nx/2, nx/2).
struct SpatialGrid {
  int d = 1;
  i64 nx = 0;
  double length = 0.0;

  double dx() const { return length / static_cast<double>(nx); }
  i64 points() const;
};

SpatialGrid make_grid(int d, i64 nx, double length);

// Coordinate of index i along one axis: -L/2 + i dx. Index nx/2 is exactly 0.
double coordinate(const SpatialGrid& g, i64 i);

// Signed frequency for index k along one axis.
double frequency(const SpatialGrid& g, i64 k);

// |xi|^2 per grid point, row-major over axes.
std::vector<double> xi_squared(const SpatialGrid& g);

struct WaveField {
  SpatialGrid grid;
  std::vector<std::complex<double>> values;
};

WaveField make_field(const SpatialGrid& g);

// exp(-|x|^2 / (2 width^2)), amplitude 1, centered at the origin.
WaveField gaussian_field(const SpatialGrid& g, double width);

WaveField random_field(const SpatialGrid& g, std::uint64_t seed,
                       std::uint64_t stream);

// Riemann-sum norms with measure dx^d; norm_sup is the grid max of |psi|.
double norm_lp(const WaveField& f, double p);
double norm_l2(const WaveField& f);
double norm_l1(const WaveField& f);
double norm_sup(const WaveField& f);

// Multiplies the spectrum by exp(i tau |xi|^2); unitary in the discrete L2
// norm. tau = 0 is the identity up to transform roundoff.
WaveField apply_propagator(const WaveField& f, double tau);

// Max of the composition defect |P_t2 P_t1 f - P_{t1+t2} f|_2 and the
// inversion defect |P_{-t1} P_t1 f - f|_2.
double compose_check(const WaveField& f, double tau1, double tau2);

// |P_tau f|_inf |tau|^{d/2} / |f|_1. The input must be well contained:
// at least 1 - 1e-10 of the |f|^2 mass inside the inner half box.
double dispersive_ratio(const WaveField& f, double tau);

struct AdmissiblePair {
  double q = 0.0;
  double p = 0.0;
  double h = 0.0;
  int d = 1;
};

// Enforces 2/q = d h (1/2 - 1/p) to 1e-12 and d (1/2 - 1/p) in (0,1).
AdmissiblePair make_pair(double q, double p, double h, int d);
double pair_alpha(const AdmissiblePair& pr);

// The q solving the admissibility relation for given p, h, d.
double admissible_q(double p, double h, int d);

struct StrichartzResult {
  double norm = 0.0;
  double ratio = 0.0;
};

// Left-endpoint mixed norm (sum_j |P_{0,t_j} f|_p^q b^{-n})^{1/q} over
// t_j = j b^{-n}, with tau_j the exact curve value at t_j. ratio divides by
// |f|_2 (0 for the zero field). The propagator phase depends on t_j only
// through the integer curve value, so transforms are cached per value.
// pair.h must equal the curve order unless allow_order_mismatch.
StrichartzResult strichartz_norm(const WaveField& f, const AdmissiblePair& pr,
                                 const Curve& c, int n,
                                 bool allow_order_mismatch = false);

// Discrete Duhamel sum u(t_j) = sum_m P_{t_m,t_j} g_m b^{-n} via prefix
// accumulation in frequency space; retarded restricts to m <= j. Returns the
// mixed (q,p) norm of u and its ratio to the max slice L2 norm.
StrichartzResult inhomogeneous_strichartz_norm(
    const std::vector<WaveField>& g, const AdmissiblePair& pr, bool retarded,
    const Curve& c, int n, bool allow_order_mismatch = false);

// Binary little-endian interleaved (re, im) doubles plus a JSON sidecar
// path + ".json" holding {d, Nx, L}.
void save_field(const WaveField& f, const std::string& path);
WaveField load_field(const std::string& path);

}  // namespace fdl
