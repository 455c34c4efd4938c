#include "fdl/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "fdl/errors.hpp"
#include "fdl/fft.hpp"
#include "fdl/io.hpp"
#include "fdl/parallel.hpp"
#include "fdl/rng.hpp"
#include "json.hpp"

namespace fdl {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_grid_match(const SpatialGrid& a, const SpatialGrid& b) {
  if (a.d != b.d || a.nx != b.nx || a.length != b.length)
    fail(ErrorKind::BadShape, "fields live on different grids");
}

std::vector<int> fft_dims(const SpatialGrid& g) {
  std::vector<int> dims(static_cast<std::size_t>(g.d),
                        static_cast<int>(g.nx));
  return dims;
}

void phase_multiply(std::vector<std::complex<double>>& spectrum,
                    const std::vector<double>& xi2, double tau) {
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double ph = tau * xi2[i];
    spectrum[i] *= std::complex<double>(std::cos(ph), std::sin(ph));
  }
}

double diff_l2(const WaveField& a, const WaveField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double dr = a.values[i].real() - b.values[i].real();
    const double di = a.values[i].imag() - b.values[i].imag();
    s += dr * dr + di * di;
  }
  return std::sqrt(s * std::pow(a.grid.dx(), a.grid.d));
}

void require_pair_for(const AdmissiblePair& pr, const Curve& c, int n,
                      const SpatialGrid& g, bool allow_order_mismatch) {
  if (pr.d != g.d) fail(ErrorKind::BadShape, "pair dimension != grid dimension");
  if (n < 1 || n > static_cast<int>(c.level))
    fail(ErrorKind::MismatchedLevel, "time level outside the curve level");
  if (!allow_order_mismatch && std::abs(pr.h - c.order()) > 1e-12)
    fail(ErrorKind::MismatchedOrder, "pair order differs from curve order");
}

// Exact propagator times at t_j = j b^-n: integer curve value over a^level.
std::vector<double> curve_taus(const Curve& c, int n, std::vector<i64>* raw) {
  const i64 slices = checked_pow(c.pattern.b, n);
  const double scale =
      static_cast<double>(checked_pow(c.pattern.a, static_cast<int>(c.level)));
  std::vector<double> taus(static_cast<std::size_t>(slices));
  if (raw) raw->resize(taus.size());
  for (i64 j = 0; j < slices; ++j) {
    const i64 v = coarse_value(c, n, j);
    if (raw) (*raw)[static_cast<std::size_t>(j)] = v;
    taus[static_cast<std::size_t>(j)] = static_cast<double>(v) / scale;
  }
  return taus;
}

double mixed_norm(const std::vector<double>& slice_norms, double q, double dt) {
  const double s = parallel_sum(slice_norms.size(), [&](std::size_t j) {
    return std::pow(slice_norms[j], q);
  });
  return std::pow(dt * s, 1.0 / q);
}

}  // namespace

i64 SpatialGrid::points() const { return d == 1 ? nx : nx * nx; }

SpatialGrid make_grid(int d, i64 nx, double length) {
  if (d != 1 && d != 2) fail(ErrorKind::BadShape, "dimension must be 1 or 2");
  if (nx < 8 || (nx & (nx - 1)) != 0)
    fail(ErrorKind::BadShape, "points per axis must be a power of two >= 8");
  if (!(length > 0.0) || !std::isfinite(length))
    fail(ErrorKind::BadShape, "domain length must be positive");
  return SpatialGrid{d, nx, length};
}

double coordinate(const SpatialGrid& g, i64 i) {
  return (static_cast<double>(i) - static_cast<double>(g.nx / 2)) * g.dx();
}

double frequency(const SpatialGrid& g, i64 k) {
  const i64 signed_k = k < g.nx / 2 ? k : k - g.nx;
  return 2.0 * kPi * static_cast<double>(signed_k) / g.length;
}

std::vector<double> xi_squared(const SpatialGrid& g) {
  const auto nx = static_cast<std::size_t>(g.nx);
  std::vector<double> axis(nx);
  for (std::size_t k = 0; k < nx; ++k) {
    const double f = frequency(g, static_cast<i64>(k));
    axis[k] = f * f;
  }
  if (g.d == 1) return axis;
  std::vector<double> out(nx * nx);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nx; ++j) out[i * nx + j] = axis[i] + axis[j];
  return out;
}

WaveField make_field(const SpatialGrid& g) {
  return WaveField{g, std::vector<std::complex<double>>(
                          static_cast<std::size_t>(g.points()))};
}

WaveField gaussian_field(const SpatialGrid& g, double width) {
  if (!(width > 0.0)) fail(ErrorKind::BadShape, "width must be positive");
  WaveField f = make_field(g);
  const auto nx = static_cast<std::size_t>(g.nx);
  std::vector<double> axis(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = coordinate(g, static_cast<i64>(i));
    axis[i] = std::exp(-x * x / (2.0 * width * width));
  }
  if (g.d == 1) {
    for (std::size_t i = 0; i < nx; ++i) f.values[i] = axis[i];
  } else {
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < nx; ++j)
        f.values[i * nx + j] = axis[i] * axis[j];
  }
  return f;
}

WaveField random_field(const SpatialGrid& g, std::uint64_t seed,
                       std::uint64_t stream) {
  WaveField f = make_field(g);
  CounterRng rng(seed, stream);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = {2.0 * rng.uniform(2 * i) - 1.0,
                   2.0 * rng.uniform(2 * i + 1) - 1.0};
  return f;
}

double norm_lp(const WaveField& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    fail(ErrorKind::BadShape, "integrability exponent must be finite and >= 1");
  const double s = parallel_sum(f.values.size(), [&](std::size_t i) {
    return std::pow(std::abs(f.values[i]), p);
  });
  return std::pow(s, 1.0 / p) *
         std::pow(f.grid.dx(), static_cast<double>(f.grid.d) / p);
}

double norm_l2(const WaveField& f) {
  const double s = parallel_sum(f.values.size(), [&](std::size_t i) {
    return std::norm(f.values[i]);
  });
  return std::sqrt(s * std::pow(f.grid.dx(), f.grid.d));
}

double norm_l1(const WaveField& f) {
  const double s = parallel_sum(f.values.size(), [&](std::size_t i) {
    return std::abs(f.values[i]);
  });
  return s * std::pow(f.grid.dx(), f.grid.d);
}

double norm_sup(const WaveField& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

WaveField apply_propagator(const WaveField& f, double tau) {
  WaveField out = f;
  const std::vector<double> xi2 = xi_squared(f.grid);
  fft_forward(out.values.data(), fft_dims(f.grid));
  phase_multiply(out.values, xi2, tau);
  fft_inverse(out.values.data(), fft_dims(f.grid));
  const double inv = 1.0 / static_cast<double>(f.grid.points());
  for (auto& v : out.values) v *= inv;
  return out;
}

double compose_check(const WaveField& f, double tau1, double tau2) {
  const WaveField step1 = apply_propagator(f, tau1);
  const WaveField chained = apply_propagator(step1, tau2);
  const WaveField direct = apply_propagator(f, tau1 + tau2);
  const WaveField back = apply_propagator(step1, -tau1);
  return std::max(diff_l2(chained, direct), diff_l2(back, f));
}

double dispersive_ratio(const WaveField& f, double tau) {
  if (tau == 0.0) fail(ErrorKind::TauZero, "dispersive decay needs tau != 0");
  const auto nx = static_cast<std::size_t>(f.grid.nx);
  double total = 0.0, inner = 0.0;
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    const double m = std::norm(f.values[idx]);
    total += m;
    bool in = true;
    const std::size_t ij[2] = {f.grid.d == 1 ? idx : idx / nx, idx % nx};
    for (int ax = 0; ax < f.grid.d; ++ax)
      in = in && std::abs(coordinate(f.grid, static_cast<i64>(ij[ax]))) <=
                     0.25 * f.grid.length;
    if (in) inner += m;
  }
  if (total == 0.0) fail(ErrorKind::DegenerateNorm, "zero field");
  if (inner < (1.0 - 1e-10) * total)
    fail(ErrorKind::NotContained,
         "field mass leaks outside the inner half of the box");
  const WaveField out = apply_propagator(f, tau);
  return norm_sup(out) *
         std::pow(std::abs(tau), 0.5 * static_cast<double>(f.grid.d)) /
         norm_l1(f);
}

AdmissiblePair make_pair(double q, double p, double h, int d) {
  if (d != 1 && d != 2) fail(ErrorKind::BadShape, "dimension must be 1 or 2");
  if (!(q > 2.0) || !(p > 2.0) || !std::isfinite(q) || !std::isfinite(p))
    fail(ErrorKind::NotAdmissible, "exponents must lie in (2, infinity)");
  if (!(h > 0.0) || !(h <= 1.0))
    fail(ErrorKind::NotAdmissible, "order must lie in (0, 1]");
  const double lhs = 2.0 / q;
  const double rhs = static_cast<double>(d) * h * (0.5 - 1.0 / p);
  if (std::abs(lhs - rhs) > 1e-12)
    fail(ErrorKind::NotAdmissible, "2/q = d h (1/2 - 1/p) violated");
  const double alpha = static_cast<double>(d) * (0.5 - 1.0 / p);
  if (!(alpha > 0.0) || !(alpha < 1.0))
    fail(ErrorKind::NotAdmissible, "d (1/2 - 1/p) must lie in (0, 1)");
  return AdmissiblePair{q, p, h, d};
}

double pair_alpha(const AdmissiblePair& pr) {
  return static_cast<double>(pr.d) * (0.5 - 1.0 / pr.p);
}

double admissible_q(double p, double h, int d) {
  const double denom = static_cast<double>(d) * h * (0.5 - 1.0 / p);
  if (!(denom > 0.0))
    fail(ErrorKind::NotAdmissible, "no admissible q for these parameters");
  return 2.0 / denom;
}

StrichartzResult strichartz_norm(const WaveField& f, const AdmissiblePair& pr,
                                 const Curve& c, int n,
                                 bool allow_order_mismatch) {
  require_pair_for(pr, c, n, f.grid, allow_order_mismatch);
  std::vector<i64> raw;
  const std::vector<double> taus = curve_taus(c, n, &raw);
  std::unordered_map<i64, double> cache;
  cache.reserve(taus.size());
  std::vector<double> slice_norms(taus.size());
  for (std::size_t j = 0; j < taus.size(); ++j) {
    auto it = cache.find(raw[j]);
    if (it == cache.end())
      it = cache.emplace(raw[j], norm_lp(apply_propagator(f, taus[j]), pr.p))
               .first;
    slice_norms[j] = it->second;
  }
  const double dt = 1.0 / static_cast<double>(taus.size());
  const double norm = mixed_norm(slice_norms, pr.q, dt);
  const double l2 = norm_l2(f);
  return StrichartzResult{norm, l2 > 0.0 ? norm / l2 : 0.0};
}

StrichartzResult inhomogeneous_strichartz_norm(
    const std::vector<WaveField>& g, const AdmissiblePair& pr, bool retarded,
    const Curve& c, int n, bool allow_order_mismatch) {
  if (g.empty()) fail(ErrorKind::BadShape, "empty forcing sequence");
  require_pair_for(pr, c, n, g[0].grid, allow_order_mismatch);
  const std::vector<double> taus = curve_taus(c, n, nullptr);
  if (g.size() != taus.size())
    fail(ErrorKind::BadShape, "forcing sequence must have b^n time slices");
  for (const WaveField& s : g) require_grid_match(s.grid, g[0].grid);

  const SpatialGrid& grid = g[0].grid;
  const std::vector<double> xi2 = xi_squared(grid);
  const std::vector<int> dims = fft_dims(grid);
  const double dt = 1.0 / static_cast<double>(taus.size());
  const double inv_points = 1.0 / static_cast<double>(grid.points());
  const std::size_t count = taus.size();

  std::vector<std::complex<double>> acc(g[0].values.size());
  auto accumulate_slice = [&](std::size_t m) {
    std::vector<std::complex<double>> spec = g[m].values;
    fft_forward(spec.data(), dims);
    phase_multiply(spec, xi2, -taus[m]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += spec[i] * dt;
  };
  if (!retarded)
    for (std::size_t m = 0; m < count; ++m) accumulate_slice(m);

  std::vector<double> slice_norms(count);
  double max_slice_l2 = 0.0;
  WaveField u = make_field(grid);
  for (std::size_t j = 0; j < count; ++j) {
    if (retarded) accumulate_slice(j);
    max_slice_l2 = std::max(max_slice_l2, norm_l2(g[j]));
    std::vector<std::complex<double>> spec = acc;
    phase_multiply(spec, xi2, taus[j]);
    fft_inverse(spec.data(), dims);
    for (std::size_t i = 0; i < spec.size(); ++i)
      u.values[i] = spec[i] * inv_points;
    slice_norms[j] = norm_lp(u, pr.p);
  }
  const double norm = mixed_norm(slice_norms, pr.q, dt);
  return StrichartzResult{norm,
                          max_slice_l2 > 0.0 ? norm / max_slice_l2 : 0.0};
}

void save_field(const WaveField& f, const std::string& path) {
  nlohmann::json side;
  side["d"] = f.grid.d;
  side["Nx"] = f.grid.nx;
  side["L"] = f.grid.length;
  io::atomic_write_bytes(path, f.values.data(),
                         f.values.size() * sizeof(std::complex<double>));
  io::atomic_write(path + ".json", side.dump(2) + "\n");
}

WaveField load_field(const std::string& path) {
  SpatialGrid g;
  try {
    const nlohmann::json side = nlohmann::json::parse(io::read_file(path + ".json"));
    g = make_grid(side.at("d").get<int>(), side.at("Nx").get<i64>(),
                  side.at("L").get<double>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::IoFailure, std::string("bad field sidecar: ") + e.what());
  }
  const std::vector<unsigned char> bytes = io::read_file_bytes(path);
  WaveField f = make_field(g);
  const std::size_t expect = f.values.size() * sizeof(std::complex<double>);
  if (bytes.size() != expect)
    fail(ErrorKind::IoFailure, "field payload size does not match sidecar");
  std::memcpy(f.values.data(), bytes.data(), expect);
  return f;
}

}  // namespace fdl
