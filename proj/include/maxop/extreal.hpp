#pragma once

// Extended-real conventions used throughout: values live in [0, +inf] with
// 1/0 = inf, 1/inf = 0, log 0 = -inf, exp(-inf) = 0. Signed -inf shows up
// only inside logarithmic intermediates (geometric means, A_infty terms).

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace maxop {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double reciprocal(double x) {
  if (x == 0.0) return kInf;
  if (std::isinf(x)) return 0.0;
  return 1.0 / x;
}

// log extended by log 0 = -inf; callers guarantee x >= 0.
inline double xlog(double x) { return x == 0.0 ? -kInf : std::log(x); }

// Product for condition constants: 0 * inf := inf, so a degenerate pair of
// averages is reported as a failed condition rather than silently dropped.
// (Integrals against a measure use the opposite, measure-theoretic 0.)
inline double degenerate_product(double a, double b) {
  if ((a == 0.0 && std::isinf(b)) || (std::isinf(a) && b == 0.0)) return kInf;
  return a * b;
}

// 17 significant digits round-trip IEEE doubles through decimal text.
inline std::string format17(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

// log(e^a + e^b) without overflow; tolerates -inf operands.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = a > b ? a : b;
  return m + std::log1p(std::exp(-(a > b ? a - b : b - a)));
}

}  // namespace maxop
