#pragma once

// Deterministic generators for test weights and fields: constants, power
// weights |x - x0|^a sampled at cell centers, two-level steps, log-normal
// fields, the designed non-A_infty family (a small constant on half the
// domain), and a spike weight (mass on one cell over a tiny floor).

#include <array>
#include <cmath>
#include <cstdint>

#include "grid.hpp"
#include "rng.hpp"

namespace maxop {

inline GridFunction constant_weight(const Domain& d, double value) {
  if (std::isnan(value) || value < 0.0 || std::isinf(value))
    throw std::invalid_argument("constant weight value must be finite and nonnegative");
  return GridFunction(d, value);
}

// w(x) = |x - center|^a with the Euclidean distance over the real axes,
// sampled at cell centers. A negative exponent at a cell whose center
// coincides with `center` yields +inf; such a function is rejected wherever a
// finite weight is required.
inline GridFunction power_weight(const Domain& d, double a,
                                 const std::array<double, 3>& center) {
  d.validate();
  if (std::isnan(a) || std::isinf(a)) throw std::invalid_argument("power exponent must be finite");
  GridFunction out(d);
  const std::int64_t n = d.cell_count();
  for (std::int64_t i = 0; i < n; ++i) {
    const Index3 c = d.unflatten(i);
    double dist2 = 0.0;
    for (int ax = 0; ax < d.dim; ++ax) {
      const double dx = d.center(c, ax) - center[ax];
      dist2 += dx * dx;
    }
    const double dist = std::sqrt(dist2);
    out.values[static_cast<std::size_t>(i)] =
        dist > 0.0 ? std::pow(dist, a) : (a > 0.0 ? 0.0 : (a == 0.0 ? 1.0 : kInf));
  }
  return out;
}

// Midpoint of the domain: off the cell-center lattice for even shapes, so
// negative exponents stay finite there.
inline std::array<double, 3> domain_midpoint(const Domain& d) {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (int a = 0; a < d.dim; ++a)
    c[a] = d.origin[a] + 0.5 * d.h * static_cast<double>(d.shape[a]);
  return c;
}

// Two-level step along axis 0: `left` on the lower half, `right` on the rest.
inline GridFunction step_weight(const Domain& d, double left, double right) {
  d.validate();
  if (std::isnan(left) || left < 0.0 || std::isinf(left) || std::isnan(right) || right < 0.0 ||
      std::isinf(right))
    throw std::invalid_argument("step levels must be finite and nonnegative");
  GridFunction out(d);
  const std::int64_t half = d.shape[0] / 2;
  const std::int64_t n = d.cell_count();
  for (std::int64_t i = 0; i < n; ++i)
    out.values[static_cast<std::size_t>(i)] = d.unflatten(i)[0] < half ? left : right;
  return out;
}

// exp(s * Z), Z standard normal, one independent draw per cell.
inline GridFunction lognormal_weight(const Domain& d, double sigma_log, std::uint64_t seed) {
  d.validate();
  if (!(sigma_log >= 0.0) || std::isinf(sigma_log))
    throw std::invalid_argument("lognormal spread must be finite and nonnegative");
  GridFunction out(d);
  SplitMix64 rng = substream(seed, 0);
  for (double& v : out.values) v = std::exp(sigma_log * rng.next_normal());
  return out;
}

// The designed non-A_infty family: eps on the lower half of axis 0 and 1 on
// the rest. Its AM/GM ratio on the full domain grows like 1/sqrt(eps), so
// the A_infty constant escapes to infinity as eps decreases with N.
inline GridFunction non_ainfty_weight(const Domain& d, double eps) {
  if (std::isnan(eps) || eps < 0.0 || std::isinf(eps))
    throw std::invalid_argument("eps must be finite and nonnegative");
  return step_weight(d, eps, 1.0);
}

// 1 on the first cell, `floor_value` elsewhere. With floor 0 the geometric
// mean of every box meeting the rest of the domain vanishes, so the A_infty
// constant is exactly +inf on the grid.
inline GridFunction spike_weight(const Domain& d, double floor_value) {
  d.validate();
  if (std::isnan(floor_value) || floor_value < 0.0 || std::isinf(floor_value))
    throw std::invalid_argument("spike floor must be finite and nonnegative");
  GridFunction out(d, floor_value);
  out.values[0] = 1.0;
  return out;
}

}  // namespace maxop
