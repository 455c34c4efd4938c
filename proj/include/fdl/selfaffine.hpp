#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdl/errors.hpp"

namespace fdl {

using i64 = std::int64_t;

// Generator of a self-affine curve of order H = ln(a)/ln(b): an increasing
// template M and a decreasing template D, each b signed steps of height 1/a.
// M's partial sums run 0 -> a and D's, started from a, run a -> 0; both must
// stay inside [0, a], and b - a must be even for such step sequences to
// exist at all.
struct Pattern {
  i64 a = 0;
  i64 b = 0;
  std::vector<int> m_steps;  // +1 / -1, summing to +a
  std::vector<int> d_steps;  // +1 / -1, summing to -a

  double order() const;  // H = ln(a)/ln(b), in (0, 1]; 1 iff a == b
};

Pattern validate_pattern(i64 a, i64 b, const std::vector<int>& m_steps,
                         const std::vector<int>& d_steps);

// "++-+" style shorthand used by the CLI and tests.
std::vector<int> parse_steps(const std::string& s);

Pattern default_pattern();        // a=2, b=4, M=++-+, D=--+-
Pattern identity_pattern(i64 b);  // a=b, all-up M: the curve X(t) = t

// Exact realization at refinement level n >= 1. values holds b^n + 1
// integers v_j with X(j b^-n) = v_j a^-n; orientations holds the b^n
// up/down flags of the grid intervals. Pattern-built curves satisfy
// v_0 = 0, v_{b^n} = a^n, |v_{j+1} - v_j| = 1, and refinement consistency
// v'_{jb} = a v_j. Hand-made curves (make_raw) may break the unit-increment
// property; every operation below only assumes nonzero increments.
struct Curve {
  Pattern pattern;
  int level = 0;
  std::vector<i64> values;
  std::vector<signed char> orientations;  // sign of each increment

  i64 intervals() const { return static_cast<i64>(orientations.size()); }
  double order() const { return pattern.order(); }
};

// a^n and b^n with a 62-bit representability guard.
i64 checked_pow(i64 base, int exp);

Curve build(const Pattern& p, int level);

// One extra level via the template recursion: an increasing interval carries
// a copy of M, a decreasing one a copy of D shifted down by one unit.
Curve refine(const Curve& c);

// Hand-made curve for experiments; orientations are derived from the value
// increments (zero increments are rejected).
Curve make_raw(Pattern p, int level, std::vector<i64> values);

struct Rational {
  i64 num;
  i64 den;
};

// X(j b^-level) as an exact rational with denominator a^level.
Rational value_at(const Curve& c, i64 j);

// Exact value index on the coarser level-m grid: v at t = j b^-m.
i64 coarse_value(const Curve& c, int m, i64 j);

// 1 / min over levels m <= level and positions j of b^{Hm} |X((j+1)b^-m) -
// X(j b^-m)|, evaluated exactly in integers (b^{Hm} = a^m). Pattern-built
// curves give exactly 1.
struct AssumptionReport {
  double c_constant;
  int attained_level;
  i64 attained_index;
};
AssumptionReport assumption_constant(const Curve& c);

// All pieces b^{Hn} (X((j+t) b^-n) - X(j b^-n)) with n + m <= level, sampled
// on the level-m subgrid and recorded as exact integer tables in units a^-m,
// deduplicated. Pattern-built curves yield one table per template (two, or
// one for the identity), independent of m and level.
struct PieceFamily {
  int scale;                            // sampling level m
  std::vector<std::vector<i64>> tables; // sorted, unique
  std::size_t count() const { return tables.size(); }
};
PieceFamily family_of_pieces(const Curve& c, int scale_m);

// Least-squares slope of log max-increment against log b^-m over
// m = 1..level; recovers H exactly for pattern-built curves.
double empirical_hoelder(const Curve& c);

std::string to_json(const Curve& c);
Curve from_json(const std::string& text);
void save(const Curve& c, const std::string& path);
Curve load(const std::string& path);

}  // namespace fdl
