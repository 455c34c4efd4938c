#include "fdl/selfaffine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fdl/io.hpp"
#include "json.hpp"

namespace fdl {

double Pattern::order() const {
  return std::log(static_cast<double>(a)) / std::log(static_cast<double>(b));
}

std::vector<int> parse_steps(const std::string& s) {
  std::vector<int> steps;
  steps.reserve(s.size());
  for (char c : s) {
    if (c == '+')
      steps.push_back(1);
    else if (c == '-')
      steps.push_back(-1);
    else
      fail(ErrorKind::BadShape, std::string("step character '") + c +
                                    "' (expected '+' or '-')");
  }
  return steps;
}

namespace {

// checks one template: steps of +-1, partial sums (seeded with `start`)
// confined to [0, a], total displacement `target`.
void check_template(const char* name, const std::vector<int>& steps, i64 a,
                    i64 b, i64 start, i64 target) {
  if (static_cast<i64>(steps.size()) != b)
    fail(ErrorKind::BadShape, std::string(name) + " has " +
                                  std::to_string(steps.size()) +
                                  " steps, expected b = " + std::to_string(b));
  i64 sum = start;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] != 1 && steps[i] != -1)
      fail(ErrorKind::BadShape,
           std::string(name) + "[" + std::to_string(i) + "] is not +-1");
    sum += steps[i];
    if (sum < 0 || sum > a)
      fail(ErrorKind::RangeViolation,
           std::string(name) + " partial sum " + std::to_string(sum) +
               " leaves [0, " + std::to_string(a) + "] at step " +
               std::to_string(i));
  }
  if (sum != start + target)
    fail(ErrorKind::SumMismatch, std::string(name) + " steps sum to " +
                                     std::to_string(sum - start) +
                                     ", expected " + std::to_string(target));
}

}  // namespace

Pattern validate_pattern(i64 a, i64 b, const std::vector<int>& m_steps,
                         const std::vector<int>& d_steps) {
  if (a < 2 || b < a)
    fail(ErrorKind::BaseOrder, "need 2 <= a <= b, got a = " +
                                   std::to_string(a) +
                                   ", b = " + std::to_string(b));
  if ((b - a) % 2 != 0)
    fail(ErrorKind::ParityImpossible,
         "b - a = " + std::to_string(b - a) +
             " is odd; b unit steps cannot sum to +-a");
  check_template("m_steps", m_steps, a, b, /*start=*/0, /*target=*/a);
  check_template("d_steps", d_steps, a, b, /*start=*/a, /*target=*/-a);
  return Pattern{a, b, m_steps, d_steps};
}

Pattern default_pattern() {
  return validate_pattern(2, 4, parse_steps("++-+"), parse_steps("--+-"));
}

Pattern identity_pattern(i64 b) {
  return validate_pattern(b, b, std::vector<int>(b, 1),
                          std::vector<int>(b, -1));
}

i64 checked_pow(i64 base, int exp) {
  constexpr i64 kLimit = i64{1} << 62;
  i64 r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > kLimit / base)
      fail(ErrorKind::Overflow, std::to_string(base) + "^" +
                                    std::to_string(exp) +
                                    " exceeds 62-bit range");
    r *= base;
  }
  return r;
}

Curve refine(const Curve& c) {
  const i64 a = c.pattern.a;
  const i64 b = c.pattern.b;
  checked_pow(b, c.level + 1);
  checked_pow(a, c.level + 1);

  const i64 old_n = c.intervals();
  Curve out;
  out.pattern = c.pattern;
  out.level = c.level + 1;
  out.values.resize(static_cast<std::size_t>(old_n * b + 1));
  out.orientations.resize(static_cast<std::size_t>(old_n * b));

  for (i64 j = 0; j < old_n; ++j) {
    const bool up = c.orientations[static_cast<std::size_t>(j)] > 0;
    const std::vector<int>& steps = up ? c.pattern.m_steps : c.pattern.d_steps;
    i64 v = a * c.values[static_cast<std::size_t>(j)];
    for (i64 i = 0; i < b; ++i) {
      out.values[static_cast<std::size_t>(j * b + i)] = v;
      out.orientations[static_cast<std::size_t>(j * b + i)] =
          static_cast<signed char>(steps[static_cast<std::size_t>(i)]);
      v += steps[static_cast<std::size_t>(i)];
    }
  }
  out.values.back() = a * c.values.back();
  return out;
}

Curve build(const Pattern& p, int level) {
  if (level < 1)
    fail(ErrorKind::BadShape, "level must be >= 1, got " +
                                  std::to_string(level));
  checked_pow(p.b, level);
  checked_pow(p.a, level);

  // level 1 is the increasing template itself
  Curve c;
  c.pattern = p;
  c.level = 1;
  c.values.resize(static_cast<std::size_t>(p.b + 1));
  c.orientations.resize(static_cast<std::size_t>(p.b));
  i64 v = 0;
  for (i64 i = 0; i < p.b; ++i) {
    c.values[static_cast<std::size_t>(i)] = v;
    c.orientations[static_cast<std::size_t>(i)] =
        static_cast<signed char>(p.m_steps[static_cast<std::size_t>(i)]);
    v += p.m_steps[static_cast<std::size_t>(i)];
  }
  c.values.back() = v;

  while (c.level < level) c = refine(c);
  return c;
}

Curve make_raw(Pattern p, int level, std::vector<i64> values) {
  const i64 n = checked_pow(p.b, level);
  if (static_cast<i64>(values.size()) != n + 1)
    fail(ErrorKind::BadShape, "expected " + std::to_string(n + 1) +
                                  " values, got " +
                                  std::to_string(values.size()));
  Curve c;
  c.pattern = std::move(p);
  c.level = level;
  c.values = std::move(values);
  c.orientations.resize(static_cast<std::size_t>(n));
  for (i64 j = 0; j < n; ++j) {
    const i64 d = c.values[static_cast<std::size_t>(j + 1)] -
                  c.values[static_cast<std::size_t>(j)];
    if (d == 0)
      fail(ErrorKind::ZeroIncrement,
           "zero increment at interval " + std::to_string(j));
    c.orientations[static_cast<std::size_t>(j)] = d > 0 ? 1 : -1;
  }
  return c;
}

Rational value_at(const Curve& c, i64 j) {
  if (j < 0 || j >= static_cast<i64>(c.values.size()))
    fail(ErrorKind::IndexOutOfRange, "grid index " + std::to_string(j));
  return Rational{c.values[static_cast<std::size_t>(j)],
                  checked_pow(c.pattern.a, c.level)};
}

i64 coarse_value(const Curve& c, int m, i64 j) {
  if (m < 0 || m > c.level)
    fail(ErrorKind::IndexOutOfRange, "coarse level " + std::to_string(m));
  const i64 stride = checked_pow(c.pattern.b, c.level - m);
  const i64 points = checked_pow(c.pattern.b, m);
  if (j < 0 || j > points)
    fail(ErrorKind::IndexOutOfRange, "coarse index " + std::to_string(j));
  return c.values[static_cast<std::size_t>(j * stride)];
}

AssumptionReport assumption_constant(const Curve& c) {
  const i64 a = c.pattern.a;
  // min over m, j of |dv| a^{m - level}; compare candidates as exact
  // fractions |dv1| a^{m1} vs |dv2| a^{m2} in 128-bit arithmetic.
  __int128 best_num = 0;  // |dv| * a^m, level fixed
  int best_m = 0;
  i64 best_j = 0;
  bool first = true;

  i64 points = c.intervals() + 1;
  i64 stride = 1;
  for (int m = c.level; m >= 1; --m) {
    const i64 n_int = (points - 1) / stride;
    __int128 am = 1;
    for (int i = 0; i < m; ++i) am *= a;
    for (i64 j = 0; j < n_int; ++j) {
      i64 dv = c.values[static_cast<std::size_t>((j + 1) * stride)] -
               c.values[static_cast<std::size_t>(j * stride)];
      if (dv == 0)
        fail(ErrorKind::ZeroIncrement,
             "flat increment at level " + std::to_string(m) + ", interval " +
                 std::to_string(j));
      if (dv < 0) dv = -dv;
      const __int128 cand = am * dv;
      // smaller m wins ties so the report points at the coarsest witness
      if (first || cand < best_num || (cand == best_num && m < best_m)) {
        best_num = cand;
        best_m = m;
        best_j = j;
        first = false;
      }
    }
    stride *= c.pattern.b;
  }

  // C = a^level / best_num, exact when the division is
  __int128 a_level = 1;
  for (int i = 0; i < c.level; ++i) a_level *= a;
  double c_constant;
  if (a_level % best_num == 0)
    c_constant = static_cast<double>(a_level / best_num);
  else
    c_constant = static_cast<double>(a_level) / static_cast<double>(best_num);
  return AssumptionReport{c_constant, best_m, best_j};
}

PieceFamily family_of_pieces(const Curve& c, int scale_m) {
  if (scale_m < 1 || scale_m > c.level)
    fail(ErrorKind::IndexOutOfRange,
         "sampling scale " + std::to_string(scale_m));
  const i64 b = c.pattern.b;
  const i64 a = c.pattern.a;
  const i64 sub_points = checked_pow(b, scale_m);

  std::set<std::vector<i64>> tables;
  for (int n = 0; n + scale_m <= c.level; ++n) {
    const i64 pieces = checked_pow(b, n);
    const i64 piece_stride = checked_pow(b, c.level - n);
    const i64 sample_stride = checked_pow(b, c.level - n - scale_m);
    // pieces are rescaled by b^{Hn} = a^n: values v (units a^-level) become
    // (v - v_base) / a^{level - n - m} in units a^-m
    const i64 denom = checked_pow(a, c.level - n - scale_m);
    for (i64 j = 0; j < pieces; ++j) {
      const i64 base = c.values[static_cast<std::size_t>(j * piece_stride)];
      std::vector<i64> t(static_cast<std::size_t>(sub_points + 1));
      for (i64 i = 0; i <= sub_points; ++i) {
        const i64 dv =
            c.values[static_cast<std::size_t>(j * piece_stride +
                                              i * sample_stride)] -
            base;
        if (dv % denom != 0)
          fail(ErrorKind::RangeViolation,
               "piece value not on the rescaled lattice (non-self-affine "
               "curve?)");
        t[static_cast<std::size_t>(i)] = dv / denom;
      }
      tables.insert(std::move(t));
    }
  }

  PieceFamily fam;
  fam.scale = scale_m;
  fam.tables.assign(tables.begin(), tables.end());
  return fam;
}

double empirical_hoelder(const Curve& c) {
  if (c.level < 2)
    fail(ErrorKind::BadShape, "need at least two levels for a slope");
  const i64 b = c.pattern.b;
  const double ln_a = std::log(static_cast<double>(c.pattern.a));
  const double ln_b = std::log(static_cast<double>(b));

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  i64 stride = checked_pow(b, c.level - 1);
  for (int m = 1; m <= c.level; ++m) {
    const i64 n_int = (static_cast<i64>(c.values.size()) - 1) / stride;
    i64 max_inc = 0;
    for (i64 j = 0; j < n_int; ++j) {
      i64 dv = c.values[static_cast<std::size_t>((j + 1) * stride)] -
               c.values[static_cast<std::size_t>(j * stride)];
      if (dv < 0) dv = -dv;
      max_inc = std::max(max_inc, dv);
    }
    if (max_inc == 0)
      fail(ErrorKind::ZeroIncrement, "flat at level " + std::to_string(m));
    const double x = -m * ln_b;  // log of the grid spacing
    const double y = std::log(static_cast<double>(max_inc)) - c.level * ln_a;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    stride /= b;
  }
  const double n = c.level;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string to_json(const Curve& c) {
  nlohmann::json j;
  j["a"] = c.pattern.a;
  j["b"] = c.pattern.b;
  j["m_steps"] = c.pattern.m_steps;
  j["d_steps"] = c.pattern.d_steps;
  j["level"] = c.level;
  j["values"] = c.values;
  std::vector<int> ori(c.orientations.begin(), c.orientations.end());
  j["orientations"] = ori;
  return j.dump(2) + "\n";
}

Curve from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::BadConfig, std::string("curve JSON: ") + e.what());
  }
  try {
    Pattern p = validate_pattern(j.at("a").get<i64>(), j.at("b").get<i64>(),
                                 j.at("m_steps").get<std::vector<int>>(),
                                 j.at("d_steps").get<std::vector<int>>());
    const int level = j.at("level").get<int>();
    auto values = j.at("values").get<std::vector<i64>>();
    Curve c = make_raw(std::move(p), level, std::move(values));
    if (j.contains("orientations")) {
      auto ori = j.at("orientations").get<std::vector<int>>();
      if (ori.size() != c.orientations.size())
        fail(ErrorKind::BadShape, "orientation count mismatch");
      for (std::size_t i = 0; i < ori.size(); ++i)
        if (ori[i] != c.orientations[i])
          fail(ErrorKind::BadShape,
               "orientation disagrees with value increment at interval " +
                   std::to_string(i));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::BadConfig, std::string("curve JSON: ") + e.what());
  }
}

void save(const Curve& c, const std::string& path) {
  io::atomic_write(path, to_json(c));
}

Curve load(const std::string& path) { return from_json(io::read_file(path)); }

}  // namespace fdl
