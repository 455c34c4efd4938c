#include "fdl/nls.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include "fdl/errors.hpp"
#include "fdl/fft.hpp"
#include "fdl/parallel.hpp"

namespace fdl {

namespace {

std::vector<int> fft_dims(const SpatialGrid& g) {
  return std::vector<int>(static_cast<std::size_t>(g.d),
                          static_cast<int>(g.nx));
}

// X(t_j) for j = 0..count on the level-n time grid, from exact integers.
std::vector<double> curve_times(const Curve& c, int n, i64 count) {
  const double scale =
      static_cast<double>(checked_pow(c.pattern.a, static_cast<int>(c.level)));
  std::vector<double> xs(static_cast<std::size_t>(count) + 1);
  for (i64 j = 0; j <= count; ++j)
    xs[static_cast<std::size_t>(j)] =
        static_cast<double>(coarse_value(c, n, j)) / scale;
  return xs;
}

double row_mass(const WaveField& f) {
  const double l2 = norm_l2(f);
  return l2 * l2;
}

}  // namespace

double admissible_r(double sigma, int d, double h) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    fail(ErrorKind::BadConfig, "nonlinearity exponent must be positive");
  if (d != 1 && d != 2) fail(ErrorKind::BadConfig, "dimension must be 1 or 2");
  if (!(h > 0.0) || !(h <= 1.0))
    fail(ErrorKind::BadConfig, "order must lie in (0, 1]");
  return 2.0 * (2.0 * sigma + 2.0) / (static_cast<double>(d) * h * sigma);
}

double criticality_ratio(double sigma, int d, double h) {
  return (2.0 * sigma + 2.0) / admissible_r(sigma, d, h);
}

double grad_norm(const WaveField& f) {
  std::vector<std::complex<double>> spec = f.values;
  fft_forward(spec.data(), fft_dims(f.grid));
  const std::vector<double> xi2 = xi_squared(f.grid);
  const double s = parallel_sum(
      static_cast<i64>(spec.size()),
      [&](i64 i) {
        const auto u = static_cast<std::size_t>(i);
        return xi2[u] * std::norm(spec[u]);
      });
  return std::sqrt(s * std::pow(f.grid.dx(), f.grid.d) /
                   static_cast<double>(f.grid.points()));
}

WaveField nonlinear_phase_step(const WaveField& f, double dt, double sigma,
                               double lambda) {
  if (!(dt >= 0.0)) fail(ErrorKind::BadConfig, "step must be nonnegative");
  if (!(sigma > 0.0))
    fail(ErrorKind::BadConfig, "nonlinearity exponent must be positive");
  WaveField out = f;
  if (lambda == 0.0 || dt == 0.0) return out;
  for (auto& v : out.values) {
    const double ph = -lambda * std::pow(std::norm(v), sigma) * dt;
    v *= std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return out;
}

void validate_config(const SolverConfig& cfg, const Curve& c) {
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma))
    fail(ErrorKind::BadConfig, "nonlinearity exponent must be positive");
  if (!std::isfinite(cfg.lambda))
    fail(ErrorKind::BadConfig, "coupling must be finite");
  if (!(cfg.T > 0.0) || !(cfg.T <= 1.0))
    fail(ErrorKind::BadConfig, "final time must lie in (0, 1]");
  if (cfg.time_level < 1)
    fail(ErrorKind::BadConfig, "time level must be at least 1");
  if (cfg.time_level > static_cast<int>(c.level))
    fail(ErrorKind::MismatchedLevel, "time level exceeds the curve level");
  const double raw =
      cfg.T *
      static_cast<double>(checked_pow(c.pattern.b, cfg.time_level));
  if (std::abs(raw - std::round(raw)) > 1e-9 || std::round(raw) < 1.0)
    fail(ErrorKind::BadConfig, "final time must be a multiple of the step");
}

i64 step_count(const SolverConfig& cfg, const Curve& c) {
  return std::llround(
      cfg.T * static_cast<double>(checked_pow(c.pattern.b, cfg.time_level)));
}

EvolveResult evolve(const WaveField& psi0, const Curve& c,
                    const SolverConfig& cfg) {
  validate_config(cfg, c);
  const i64 steps = step_count(cfg, c);
  const double dt =
      1.0 / static_cast<double>(checked_pow(c.pattern.b, cfg.time_level));
  const std::vector<double> xs = curve_times(c, cfg.time_level, steps);
  const double r = admissible_r(cfg.sigma, psi0.grid.d, c.order());
  const double p_nl = 2.0 * cfg.sigma + 2.0;

  EvolveResult res{psi0, RunTrace{}, RunStatus::Completed};
  res.trace.r = r;
  res.trace.rows.reserve(static_cast<std::size_t>(steps));
  double mixed_sum = 0.0;
  double peak0 = 0.0, grad0 = 0.0;
  for (i64 j = 0; j < steps; ++j) {
    const double mass = row_mass(res.psi);
    const double peak = norm_sup(res.psi);
    const double grad = grad_norm(res.psi);
    res.trace.rows.push_back(
        {j, static_cast<double>(j) * dt, mass, peak, grad});
    if (!std::isfinite(mass) || !std::isfinite(peak) ||
        !std::isfinite(grad)) {
      res.status = RunStatus::NanDetected;
      res.trace.mixed_norm = std::pow(mixed_sum, 1.0 / r);
      return res;
    }
    if (j == 0) {
      peak0 = peak;
      grad0 = grad;
    } else if ((peak0 > 0.0 && peak > 10.0 * peak0) ||
               (grad0 > 0.0 && grad > 10.0 * grad0)) {
      res.trace.blowup_flag = true;
    }
    mixed_sum += std::pow(norm_lp(res.psi, p_nl), r) * dt;

    const double dx_curve = xs[static_cast<std::size_t>(j) + 1] -
                            xs[static_cast<std::size_t>(j)];
    if (cfg.method == Method::Lie) {
      res.psi = nonlinear_phase_step(res.psi, dt, cfg.sigma, cfg.lambda);
      res.psi = apply_propagator(res.psi, dx_curve);
    } else {
      res.psi = nonlinear_phase_step(res.psi, 0.5 * dt, cfg.sigma, cfg.lambda);
      res.psi = apply_propagator(res.psi, dx_curve);
      res.psi = nonlinear_phase_step(res.psi, 0.5 * dt, cfg.sigma, cfg.lambda);
    }
  }
  res.trace.mixed_norm = std::pow(mixed_sum, 1.0 / r);
  if (!std::isfinite(norm_sup(res.psi))) res.status = RunStatus::NanDetected;
  return res;
}

PicardResult picard_iterate(const WaveField& psi0, const Curve& c,
                            const SolverConfig& cfg, int iterations) {
  validate_config(cfg, c);
  if (iterations < 1)
    fail(ErrorKind::BadConfig, "need at least one iteration");
  const i64 steps = step_count(cfg, c);
  const double dt =
      1.0 / static_cast<double>(checked_pow(c.pattern.b, cfg.time_level));
  const std::vector<double> xs = curve_times(c, cfg.time_level, steps);
  const std::vector<double> xi2 = xi_squared(psi0.grid);
  const std::vector<int> dims = fft_dims(psi0.grid);
  const double inv_points = 1.0 / static_cast<double>(psi0.grid.points());
  const double r = admissible_r(cfg.sigma, psi0.grid.d, c.order());
  const double p_nl = 2.0 * cfg.sigma + 2.0;
  const auto count = static_cast<std::size_t>(steps) + 1;

  std::vector<std::complex<double>> psi0_hat = psi0.values;
  fft_forward(psi0_hat.data(), dims);

  // Gamma(psi)(t_j) from the running Duhamel prefix over m < j.
  const std::complex<double> duhamel_factor(0.0, -cfg.lambda);
  auto emit = [&](const std::vector<std::complex<double>>& acc, double x) {
    WaveField out = make_field(psi0.grid);
    std::vector<std::complex<double>> spec(psi0_hat.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double ph = x * xi2[i];
      spec[i] = (psi0_hat[i] + duhamel_factor * acc[i]) *
                std::complex<double>(std::cos(ph), std::sin(ph));
    }
    fft_inverse(spec.data(), dims);
    for (std::size_t i = 0; i < spec.size(); ++i)
      out.values[i] = spec[i] * inv_points;
    return out;
  };

  const std::vector<std::complex<double>> zero_acc(psi0_hat.size());
  std::vector<WaveField> cur;
  cur.reserve(count);
  for (std::size_t j = 0; j < count; ++j) cur.push_back(emit(zero_acc, xs[j]));

  PicardResult res;
  res.r = r;
  int grow_streak = 0;
  double prev_dist = -1.0;
  WaveField diff = make_field(psi0.grid);
  for (int it = 0; it < iterations; ++it) {
    std::vector<WaveField> next;
    next.reserve(count);
    std::vector<std::complex<double>> acc(psi0_hat.size());
    for (std::size_t j = 0; j < count; ++j) {
      next.push_back(emit(acc, xs[j]));
      if (j + 1 == count) break;
      std::vector<std::complex<double>> w = cur[j].values;
      for (auto& v : w) v *= std::pow(std::norm(v), cfg.sigma);
      fft_forward(w.data(), dims);
      for (std::size_t i = 0; i < acc.size(); ++i) {
        const double ph = -xs[j] * xi2[i];
        acc[i] +=
            w[i] * std::complex<double>(std::cos(ph), std::sin(ph)) * dt;
      }
    }
    double dsum = 0.0;
    for (std::size_t j = 0; j + 1 < count; ++j) {
      for (std::size_t i = 0; i < diff.values.size(); ++i)
        diff.values[i] = next[j].values[i] - cur[j].values[i];
      dsum += std::pow(norm_lp(diff, p_nl), r) * dt;
    }
    const double dist = std::pow(dsum, 1.0 / r);
    res.distances.push_back(dist);
    if (prev_dist >= 0.0 && dist > prev_dist) {
      if (++grow_streak >= 3)
        fail(ErrorKind::Divergence,
             "fixed-point distances grew three times in a row");
    } else {
      grow_streak = 0;
    }
    prev_dist = dist;
    cur = std::move(next);
  }
  res.sequence = std::move(cur);
  return res;
}

std::vector<ScanRow> criticality_scan(const WaveField& psi0,
                                      const Curve& modulated,
                                      const SolverConfig& base,
                                      const std::vector<double>& sigmas) {
  if (sigmas.empty())
    fail(ErrorKind::BadConfig, "exponent list must not be empty");
  const Curve control = build(identity_pattern(modulated.pattern.b),
                              static_cast<int>(modulated.level));
  for (double s : sigmas) {
    SolverConfig probe = base;
    probe.sigma = s;
    validate_config(probe, modulated);
    validate_config(probe, control);
  }
  std::vector<ScanRow> rows(2 * sigmas.size());
  parallel_for(static_cast<i64>(rows.size()), [&](i64 idx) {
    const auto si = static_cast<std::size_t>(idx) / 2;
    const bool control_run = idx % 2 == 1;
    SolverConfig cfg = base;
    cfg.sigma = sigmas[si];
    const EvolveResult er =
        evolve(psi0, control_run ? control : modulated, cfg);
    ScanRow row;
    row.sigma = sigmas[si];
    row.control = control_run;
    row.status = er.status;
    const TraceRow& first = er.trace.rows.front();
    double pg = 1.0, gg = 1.0, md = 0.0;
    auto fold = [&](double mass, double peak, double grad) {
      if (first.peak > 0.0) pg = std::max(pg, peak / first.peak);
      if (first.grad_norm > 0.0) gg = std::max(gg, grad / first.grad_norm);
      if (first.mass > 0.0)
        md = std::max(md, std::abs(mass - first.mass) / first.mass);
    };
    for (const TraceRow& tr : er.trace.rows)
      fold(tr.mass, tr.peak, tr.grad_norm);
    if (er.status == RunStatus::Completed)
      fold(row_mass(er.psi), norm_sup(er.psi), grad_norm(er.psi));
    row.peak_growth = pg;
    row.grad_growth = gg;
    row.mass_drift = md;
    rows[static_cast<std::size_t>(idx)] = row;
  });
  return rows;
}

}  // namespace fdl
