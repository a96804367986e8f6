#pragma once

#include <cstdint>
#include <optional>
#include <map>
#include <string>
#include <vector>

#include "sundman/eval.hpp"
#include "sundman/expr.hpp"

namespace sundman {

struct Interval {
  double lo = 0.3;
  double hi = 1.7;
  double mid() const { return 0.5 * (lo + hi); }
};

/// Sampling region for probabilistic identity tests. Variables without an
/// explicit interval use [0.3, 1.7].
struct SampleBox {
  std::map<std::string, Interval> intervals;
  int samples = 64;
  std::uint64_t seed = 0x5EED42;
  double tol = 1e-9;
  std::map<std::string, double> anchors;  // lower limits for int(., v); default: interval lo

  SampleBox& set(const std::string& var, double lo, double hi) {
    intervals[var] = {lo, hi};
    return *this;
  }
  Interval interval(const std::string& var) const;

  /// Deterministic sample points over `vars` (seeded; same box -> same points).
  std::vector<expr::EvalPoint> draw(const std::vector<std::string>& vars) const;
};

struct ZeroTest {
  bool zero = false;
  double worst_residual = 0.0;  // max |e(p)|
  double worst_scaled = 0.0;    // max |e(p)| / (1 + magnitude of the largest term)
  expr::EvalPoint worst_point;
  int evaluated = 0;
  int singular = 0;
};

/// Evaluates `e` at the box points and declares it zero when every scaled
/// residual is below tol. Points where evaluation fails are skipped; throws
/// AllPointsSingular when more than 90% of them fail.
ZeroTest test_zero(const expr::Expr& e, const SampleBox& box);
bool is_identically_zero(const expr::Expr& e, const SampleBox& box);

/// True when `e` is numerically independent of every free variable outside
/// `vars` (structural independence short-circuits).
bool depends_only_on(const expr::Expr& e, const std::vector<std::string>& vars, const SampleBox& box);

/// Removes a spurious symbolic dependence: if `e` mentions `var` but is
/// numerically independent of it, `var` is replaced by a rational anchor
/// inside the box and the result simplified. A result that is numerically a
/// closed number becomes a nearby rational (or 0).
expr::Expr collapse(const expr::Expr& e, const std::string& var, const SampleBox& box);

/// Applies collapse for each variable in turn.
expr::Expr collapse_all(const expr::Expr& e, const SampleBox& box);

/// Numeric value of a variable-free expression, if it is finite.
std::optional<double> numeric_value(const expr::Expr& e, const SampleBox& box);

}  // namespace sundman
