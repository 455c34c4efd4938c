#include "fdl/hls.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <set>
#include <utility>

#include "fdl/errors.hpp"
#include "fdl/fft.hpp"
#include "fdl/gauss.hpp"
#include "fdl/io.hpp"
#include "fdl/parallel.hpp"
#include "fdl/rng.hpp"

namespace fdl {
namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    fail(ErrorKind::AlphaOutOfRange,
         "alpha must lie in (0,1), got " + io::format_double(alpha));
}

void require_cell(const Curve& c, i64 k, i64 l) {
  if (k < 0 || k >= c.intervals() || l < 0 || l >= c.intervals())
    fail(ErrorKind::IndexOutOfRange,
         "cell (" + std::to_string(k) + ", " + std::to_string(l) +
             ") outside level " + std::to_string(c.level));
}

void require_step(const StepFunction& f, const Curve& c, const char* name) {
  if (f.level != c.level)
    fail(ErrorKind::MismatchedLevel,
         std::string(name) + " is level " + std::to_string(f.level) +
             ", curve is level " + std::to_string(c.level));
  if (static_cast<i64>(f.samples.size()) != c.intervals())
    fail(ErrorKind::BadShape,
         std::string(name) + " has " + std::to_string(f.samples.size()) +
             " samples, expected " + std::to_string(c.intervals()));
}

void require_nonnegative(const StepFunction& f, const char* name) {
  for (double x : f.samples)
    if (!(x >= 0.0))
      fail(ErrorKind::RangeViolation,
           std::string(name) + " must be nonnegative");
}

double abs_pow(i64 w, double expo) {
  return std::pow(static_cast<double>(w < 0 ? -w : w), expo);
}

// iota for one cell, stated on the integer representation: with unit step
// dt = b^-n and values X = v a^-n, the four-term second difference of
// |.|^(2-alpha) over the cell corners collapses every sign case of the
// piecewise-linear integral into
//   iota = a^(n alpha) S / (b^2n dK dL (1-alpha)(2-alpha)),
//   S = |vK1-vL0|^(2-a) + |vK0-vL1|^(2-a) - |vK1-vL1|^(2-a) - |vK0-vL0|^(2-a).
double iota_values(int level, i64 a, i64 b, i64 vk0, i64 vk1, i64 vl0, i64 vl1,
                   double alpha) {
  const i64 dk = vk1 - vk0;
  const i64 dl = vl1 - vl0;
  if (dk == 0 || dl == 0)
    fail(ErrorKind::ZeroIncrement, "flat interval in iota cell");
  const double expo = 2.0 - alpha;
  // extended precision: the four terms nearly cancel for distant cells, and
  // plain double association error would exceed the advertised accuracy
  const double s = static_cast<double>(
      (static_cast<long double>(abs_pow(vk1 - vl0, expo)) +
       abs_pow(vk0 - vl1, expo)) -
      abs_pow(vk1 - vl1, expo) - abs_pow(vk0 - vl0, expo));
  const double b2n = static_cast<double>(checked_pow(b, 2 * level));
  const double an_alpha = std::pow(static_cast<double>(a),
                                   static_cast<double>(level) * alpha);
  return an_alpha * s /
         (b2n * static_cast<double>(dk) * static_cast<double>(dl) *
          (1.0 - alpha) * expo);
}

// ---- quadrature oracle ----------------------------------------------------

struct QVert {
  double u, w;
  double wval;  // exact: integer at corners, 0 at crossing points
};

double polygon_area(const std::vector<QVert>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const QVert& c = p[i];
    const QVert& n = p[(i + 1) % p.size()];
    s += c.u * n.w - n.u * c.w;
  }
  return 0.5 * std::abs(s);
}

// Clip the unit square against one side of the line W = 0. Corner W values
// are integers, so sign tests are exact; crossing points carry W = 0 by
// construction.
std::vector<QVert> clip_square(const std::array<QVert, 4>& sq, int keep_sign) {
  std::vector<QVert> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const QVert& cur = sq[i];
    const QVert& nxt = sq[(i + 1) % 4];
    const double wc = keep_sign * cur.wval;
    const double wn = keep_sign * nxt.wval;
    if (wc >= 0.0) out.push_back(cur);
    if ((wc < 0.0 && wn > 0.0) || (wc > 0.0 && wn < 0.0)) {
      const double t = cur.wval / (cur.wval - nxt.wval);
      out.push_back({cur.u + t * (nxt.u - cur.u), cur.w + t * (nxt.w - cur.w),
                     0.0});
    }
  }
  return out;
}

// integral over a triangle with one vertex on the zero line of |W|^-alpha,
// divided by the triangle area: 2/(2-alpha) * mean of |W|^-alpha along the
// opposite edge, in closed form from the two remaining |W| values.
double edge_moment(double x, double y, double alpha) {
  if (x == y) return std::pow(x, -alpha);
  if (x == 0.0) return std::pow(y, -alpha) / (1.0 - alpha);
  if (y == 0.0) return std::pow(x, -alpha) / (1.0 - alpha);
  return (std::pow(x, 1.0 - alpha) - std::pow(y, 1.0 - alpha)) /
         ((1.0 - alpha) * (x - y));
}

double polygon_integral(const std::vector<QVert>& poly, double alpha) {
  if (poly.size() < 3) return 0.0;
  std::size_t z = poly.size();
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (poly[i].wval == 0.0) {
      z = i;
      break;
    }
  if (z == poly.size())
    fail(ErrorKind::BadShape, "clipped cell has no vertex on the crossing");
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const QVert& v0 = poly[z];
    const QVert& va = poly[(z + i) % poly.size()];
    const QVert& vb = poly[(z + i + 1) % poly.size()];
    const double area =
        0.5 * std::abs((va.u - v0.u) * (vb.w - v0.w) -
                       (vb.u - v0.u) * (va.w - v0.w));
    if (area == 0.0) continue;
    total += 2.0 * area / (2.0 - alpha) *
             edge_moment(std::abs(va.wval), std::abs(vb.wval), alpha);
  }
  return total;
}

struct AdaptiveEnv {
  double c00, dk, dl;  // W(u,w) = c00 + dk u - dl w, scaled to X units
  double eps;
  double alpha;
  long budget;
};

double kernel(const AdaptiveEnv& env, double u, double w) {
  return std::pow(std::abs(env.c00 + env.dk * u - env.dl * w) + env.eps,
                  -env.alpha);
}

double gauss_cell(const AdaptiveEnv& env, double u0, double du, double w0,
                  double dw) {
  double s = 0.0;
  for (int i = 0; i < gauss::kN4; ++i) {
    const double u = u0 + gauss::kX4[i] * du;
    double row = 0.0;
    for (int j = 0; j < gauss::kN5; ++j)
      row += gauss::kW5[j] * kernel(env, u, w0 + gauss::kX5[j] * dw);
    s += gauss::kW4[i] * row;
  }
  return s * du * dw;
}

double adapt_cell(AdaptiveEnv& env, double u0, double du, double w0, double dw,
                  double coarse, double tol, int depth) {
  const double hu = 0.5 * du;
  const double hw = 0.5 * dw;
  const double q00 = gauss_cell(env, u0, hu, w0, hw);
  const double q10 = gauss_cell(env, u0 + hu, hu, w0, hw);
  const double q01 = gauss_cell(env, u0, hu, w0 + hw, hw);
  const double q11 = gauss_cell(env, u0 + hu, hu, w0 + hw, hw);
  const double fine = (q00 + q10) + (q01 + q11);
  if (std::abs(fine - coarse) <= tol || depth >= 26) return fine;
  env.budget -= 4;
  if (env.budget < 0)
    fail(ErrorKind::NonConvergence, "cell refinement budget exhausted");
  // halve the allowance per depth: cells straddling the kink of |.|+eps form
  // a one dimensional family, so quartering would demand unreachable depths
  const double ct = 0.5 * tol;
  const int d = depth + 1;
  return (adapt_cell(env, u0, hu, w0, hw, q00, ct, d) +
          adapt_cell(env, u0 + hu, hu, w0, hw, q10, ct, d)) +
         (adapt_cell(env, u0, hu, w0 + hw, hw, q01, ct, d) +
          adapt_cell(env, u0 + hu, hu, w0 + hw, hw, q11, ct, d));
}

// ---- bucketed sums ---------------------------------------------------------

constexpr i64 kDirectCorrLimit = 512;
constexpr i64 kValueRangeLimit = i64{1} << 22;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

HlsExponents make_exponents(double alpha, double h, double p, double q) {
  require_alpha(alpha);
  if (!(h > 0.0) || !std::isfinite(h))
    fail(ErrorKind::NotAdmissible, "order must be positive");
  if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q))
    fail(ErrorKind::NotAdmissible, "p and q must lie in (1, inf)");
  const double lhs = 2.0 - alpha * h;
  const double rhs = 1.0 / p + 1.0 / q;
  if (std::abs(lhs - rhs) > 1e-12)
    fail(ErrorKind::NotAdmissible,
         "exponent relation 2 - alpha h = 1/p + 1/q violated by " +
             io::format_double(lhs - rhs));
  return {alpha, p, q, h};
}

HlsExponents symmetric_exponents(double alpha, double h) {
  require_alpha(alpha);
  if (!(h > 0.0) || !(2.0 - alpha * h > 0.0))
    fail(ErrorKind::NotAdmissible, "no symmetric exponent for this order");
  const double p = 2.0 / (2.0 - alpha * h);
  return make_exponents(alpha, h, p, p);
}

StepFunction step_constant(const Curve& c, double value) {
  return {c.level,
          std::vector<double>(static_cast<std::size_t>(c.intervals()), value)};
}

StepFunction step_indicator(const Curve& c, int scale_m) {
  if (scale_m < 1 || scale_m > c.level)
    fail(ErrorKind::IndexOutOfRange, "indicator scale outside 1..level");
  StepFunction f{c.level, std::vector<double>(
                              static_cast<std::size_t>(c.intervals()), 0.0)};
  const i64 width = checked_pow(c.pattern.b, c.level - scale_m);
  for (i64 j = 0; j < width; ++j) f.samples[static_cast<std::size_t>(j)] = 1.0;
  return f;
}

StepFunction step_power(const Curve& c, double beta) {
  const i64 cnt = c.intervals();
  StepFunction f{c.level, std::vector<double>(static_cast<std::size_t>(cnt))};
  const double clip = std::pow(static_cast<double>(cnt), beta);
  f.samples[0] = clip;
  for (i64 j = 1; j < cnt; ++j)
    f.samples[static_cast<std::size_t>(j)] =
        clip * std::pow(static_cast<double>(j), -beta);
  return f;
}

StepFunction step_random(const Curve& c, std::uint64_t seed,
                         std::uint64_t stream) {
  const i64 cnt = c.intervals();
  CounterRng rng(seed, stream);
  StepFunction f{c.level, std::vector<double>(static_cast<std::size_t>(cnt))};
  for (i64 j = 0; j < cnt; ++j)
    f.samples[static_cast<std::size_t>(j)] =
        rng.uniform(static_cast<std::uint64_t>(j));
  return f;
}

double norm_p(const StepFunction& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    fail(ErrorKind::NotAdmissible, "norm exponent must lie in [1, inf)");
  double s = 0.0;
  for (double x : f.samples) s += std::pow(std::abs(x), p);
  const double measure =
      1.0 / static_cast<double>(f.samples.size() == 0 ? 1 : f.samples.size());
  return std::pow(s * measure, 1.0 / p);
}

double iota_closed_form(const Curve& c, i64 k, i64 l, double alpha) {
  require_alpha(alpha);
  require_cell(c, k, l);
  const auto ku = static_cast<std::size_t>(k);
  const auto lu = static_cast<std::size_t>(l);
  return iota_values(c.level, c.pattern.a, c.pattern.b, c.values[ku],
                     c.values[ku + 1], c.values[lu], c.values[lu + 1], alpha);
}

double iota_quadrature(const Curve& c, i64 k, i64 l, double alpha, double eps,
                       double rel_tol) {
  require_alpha(alpha);
  require_cell(c, k, l);
  if (!(eps >= 0.0))
    fail(ErrorKind::RangeViolation, "eps must be nonnegative");
  const auto ku = static_cast<std::size_t>(k);
  const auto lu = static_cast<std::size_t>(l);
  const i64 c00 = c.values[ku] - c.values[lu];
  const i64 dk = c.values[ku + 1] - c.values[ku];
  const i64 dl = c.values[lu + 1] - c.values[lu];
  const i64 corners[4] = {c00, c00 + dk, c00 + dk - dl, c00 - dl};
  const i64 cmin = *std::min_element(corners, corners + 4);
  const i64 cmax = *std::max_element(corners, corners + 4);

  const double bn = static_cast<double>(checked_pow(c.pattern.b, c.level));
  const double cell_area = 1.0 / (bn * bn);
  const double a_pow_n =
      static_cast<double>(checked_pow(c.pattern.a, c.level));

  if (eps == 0.0 && cmin <= 0 && cmax >= 0) {
    // the crossing set meets the cell: split along it and integrate each
    // side exactly by triangle moments against the affine W
    const std::array<QVert, 4> sq = {{
        {0.0, 0.0, static_cast<double>(c00)},
        {1.0, 0.0, static_cast<double>(c00 + dk)},
        {1.0, 1.0, static_cast<double>(c00 + dk - dl)},
        {0.0, 1.0, static_cast<double>(c00 - dl)},
    }};
    double unit = 0.0;
    for (int sign : {+1, -1}) {
      std::vector<QVert> poly = clip_square(sq, sign);
      if (poly.size() < 3 || polygon_area(poly) == 0.0) continue;
      unit += polygon_integral(poly, alpha);
    }
    return cell_area * std::pow(a_pow_n, alpha) * unit;
  }

  AdaptiveEnv env{static_cast<double>(c00) / a_pow_n,
                  static_cast<double>(dk) / a_pow_n,
                  static_cast<double>(dl) / a_pow_n,
                  eps,
                  alpha,
                  long{1} << 22};
  const double coarse = gauss_cell(env, 0.0, 1.0, 0.0, 1.0);
  const double tol = rel_tol * std::max(std::abs(coarse), 1e-300);
  return cell_area * adapt_cell(env, 0.0, 1.0, 0.0, 1.0, coarse, tol, 0);
}

IotaMatrix iota_matrix(const Curve& c, double alpha) {
  require_alpha(alpha);
  const i64 n = c.intervals();
  if (n > (i64{1} << 12))
    fail(ErrorKind::BadShape,
         "dense cell table capped at 2^24 entries; stream instead");
  IotaMatrix m{c.level, n, std::vector<double>(static_cast<std::size_t>(n * n))};
  for (i64 k = 0; k < n; ++k)
    for (i64 l = 0; l <= k; ++l) {
      const double v = iota_closed_form(c, k, l, alpha);
      m.entries[static_cast<std::size_t>(k * n + l)] = v;
      m.entries[static_cast<std::size_t>(l * n + k)] = v;
    }
  return m;
}

double hls_sum(const StepFunction& f, const StepFunction& g, const Curve& c,
               double alpha) {
  require_alpha(alpha);
  require_step(f, c, "f");
  require_step(g, c, "g");
  require_nonnegative(f, "f");
  require_nonnegative(g, "g");

  const i64 cnt = c.intervals();
  const auto [vmin_it, vmax_it] =
      std::minmax_element(c.values.begin(), c.values.end());
  const i64 vmin = *vmin_it;
  const i64 range = *vmax_it - vmin + 1;
  if (range > kValueRangeLimit)
    fail(ErrorKind::Overflow, "value range too wide for bucketed sum");
  const auto v = static_cast<std::size_t>(range);

  // af = (right-endpoint mass) - (left-endpoint mass) of f_j / dv_j;
  // bg the reverse for g. The double sum collapses to a correlation over
  // integer value differences.
  std::vector<double> af(v, 0.0), bg(v, 0.0);
  for (i64 j = 0; j < cnt; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const i64 left = c.values[ju] - vmin;
    const i64 right = c.values[ju + 1] - vmin;
    const double dv = static_cast<double>(c.values[ju + 1] - c.values[ju]);
    const double fj = f.samples[ju] / dv;
    const double gj = g.samples[ju] / dv;
    af[static_cast<std::size_t>(right)] += fj;
    af[static_cast<std::size_t>(left)] -= fj;
    bg[static_cast<std::size_t>(left)] += gj;
    bg[static_cast<std::size_t>(right)] -= gj;
  }

  std::vector<double> corr(2 * v - 1, 0.0);  // delta = idx - (v-1)
  if (range <= kDirectCorrLimit) {
    for (std::size_t u = 0; u < v; ++u) {
      if (af[u] == 0.0) continue;
      for (std::size_t w = 0; w < v; ++w)
        corr[u + v - 1 - w] += af[u] * bg[w];
    }
  } else {
    const std::size_t padded = next_pow2(2 * v);
    std::vector<std::complex<double>> fa(padded), fb(padded);
    for (std::size_t i = 0; i < v; ++i) {
      fa[i] = af[i];
      fb[i] = bg[i];
    }
    fft_forward(fa);
    fft_forward(fb);
    for (std::size_t i = 0; i < padded; ++i)
      fa[i] *= std::conj(fb[i]);
    fft_inverse(fa);
    const double scale = 1.0 / static_cast<double>(padded);
    for (std::size_t d = 0; d < v; ++d)
      corr[v - 1 + d] = fa[d].real() * scale;
    for (std::size_t d = 1; d < v; ++d)
      corr[v - 1 - d] = fa[padded - d].real() * scale;
  }

  const double expo = 2.0 - alpha;
  double s = 0.0;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const i64 delta = static_cast<i64>(i) - (range - 1);
    if (delta == 0) continue;
    s += corr[i] * abs_pow(delta, expo);
  }

  const double b2n = static_cast<double>(checked_pow(c.pattern.b, 2 * c.level));
  const double an_alpha = std::pow(static_cast<double>(c.pattern.a),
                                   static_cast<double>(c.level) * alpha);
  return an_alpha * s / (b2n * (1.0 - alpha) * expo);
}

double hls_sum_reference(const StepFunction& f, const StepFunction& g,
                         const Curve& c, double alpha) {
  require_alpha(alpha);
  require_step(f, c, "f");
  require_step(g, c, "g");
  require_nonnegative(f, "f");
  require_nonnegative(g, "g");
  const i64 cnt = c.intervals();
  return parallel_sum(cnt * cnt, [&](i64 idx) {
    const i64 j = idx / cnt;
    const i64 k = idx % cnt;
    const double w = f.samples[static_cast<std::size_t>(j)] *
                     g.samples[static_cast<std::size_t>(k)];
    if (w == 0.0) return 0.0;
    return w * iota_closed_form(c, j, k, alpha);
  });
}

double hls_ratio(const StepFunction& f, const StepFunction& g, const Curve& c,
                 const HlsExponents& e) {
  const double sum = hls_sum(f, g, c, e.alpha);
  const double nf = norm_p(f, e.p);
  const double ng = norm_p(g, e.q);
  if (nf == 0.0 || ng == 0.0) {
    if (sum != 0.0)
      fail(ErrorKind::DegenerateNorm,
           "vanishing norm with nonvanishing sum");
    return 0.0;
  }
  return sum / (nf * ng);
}

WorstCaseReport worst_case_search(const Curve& c, const HlsExponents& e,
                                  int trials, std::uint64_t seed) {
  const bool pattern_built =
      c.values == build(c.pattern, c.level).values;
  std::vector<int> levels;
  if (pattern_built)
    for (int m = 1; m <= c.level; ++m) levels.push_back(m);
  else
    levels.push_back(c.level);

  std::vector<double> betas = {1.0 / e.p, 1.0 - 0.5 * e.alpha * e.h};
  betas.push_back(0.5 * (betas[0] + betas[1]));

  WorstCaseReport report;
  for (int m : levels) {
    const Curve cm = pattern_built ? build(c.pattern, m) : c;
    WorstCaseRow row{m, -1.0, ""};

    auto consider = [&](const std::string& id, const StepFunction& cf,
                        const StepFunction& cg) {
      const double r = hls_ratio(cf, cg, cm, e);
      if (r > row.max_ratio) {
        row.max_ratio = r;
        row.argmax_id = id;
      }
    };

    const StepFunction ones = step_constant(cm, 1.0);
    consider("ones", ones, ones);
    for (int s = 1; s <= m; ++s) {
      const StepFunction ind = step_indicator(cm, s);
      consider("indicator:" + std::to_string(s), ind, ind);
    }
    for (double beta : betas) {
      const StepFunction pw = step_power(cm, beta);
      consider("power:" + io::format_double(beta), pw, pw);
    }
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t base = (static_cast<std::uint64_t>(m) << 32) |
                                 (static_cast<std::uint64_t>(t) << 1);
      consider("random:" + std::to_string(t),
               step_random(cm, seed, base),
               step_random(cm, seed, base | 1));
    }

    if (row.max_ratio > report.max_ratio) {
      report.max_ratio = row.max_ratio;
      report.argmax_id = row.argmax_id;
      report.argmax_level = m;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<ScalingRow> scaling_check(const Curve& c, double alpha) {
  require_alpha(alpha);
  const bool pattern_built =
      c.values == build(c.pattern, c.level).values;
  std::vector<int> levels;
  if (pattern_built)
    for (int m = 1; m <= c.level; ++m) levels.push_back(m);
  else
    levels.push_back(c.level);

  const double h = c.order();
  std::vector<ScalingRow> rows;
  for (int m : levels) {
    const Curve cm = pattern_built ? build(c.pattern, m) : c;
    // the cell value depends on the intervals only through (value, increment)
    // pairs, so the maximum runs over distinct pairs
    std::set<std::pair<i64, i64>> types;
    for (i64 j = 0; j < cm.intervals(); ++j) {
      const auto ju = static_cast<std::size_t>(j);
      types.emplace(cm.values[ju], cm.values[ju + 1] - cm.values[ju]);
    }
    double best = 0.0;
    for (const auto& [vk, dk] : types)
      for (const auto& [vl, dl] : types)
        best = std::max(best, iota_values(m, cm.pattern.a, cm.pattern.b, vk,
                                          vk + dk, vl, vl + dl, alpha));
    const double normalized =
        best * std::pow(static_cast<double>(cm.pattern.b),
                        static_cast<double>(m) * (2.0 - h * alpha));
    rows.push_back({m, best, normalized});
  }
  return rows;
}

}  // namespace fdl
