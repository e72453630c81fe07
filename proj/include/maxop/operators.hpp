#pragma once

// Maximal and minimal averaging operators over a basis:
//   maximal             M_* f(x) = sup { mean(f over B) : x in B }
//   maximal_fast_dyadic same field, O(cells) two-pass tree algorithm
//   minimal_operator    m f(x)   = inf { avg(f over B)  : x in B }
// Weighted forms take sigma-averages; sigma-null sets carry no mean and are
// skipped, and a cell contained in no admissible set gets 0 (the operator
// vanishes off the union of the family).
//
// maximal() is the reference route: with a witness request (or for the
// dyadic family) it enumerates sets and scatters their means; for cube and
// rectangle families it combines O(1) box means from prefix tables with a
// monotone-deque sliding-window maximum per size, so a full field costs
// O(#sizes * #cells) instead of O(sum of set volumes).

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "basis.hpp"
#include "grid.hpp"
#include "means.hpp"

namespace maxop {

using MaximalField = GridFunction;  // values may be +inf

namespace detail {

// Sliding extremum with clamped windows: out[x] = ext over in[p],
// p in [max(0, x-window+1), min(x, P-1)], P = in length, out length
// P + window - 1. The window is never empty.
inline void window_extremum_line(const double* in, std::int64_t stride_in, std::int64_t p_len,
                                 std::int64_t window, double* out, std::int64_t stride_out,
                                 std::int64_t out_len, bool take_min) {
  std::deque<std::int64_t> dq;
  auto better_or_equal = [&](double a, double b) { return take_min ? a <= b : a >= b; };
  for (std::int64_t x = 0; x < out_len; ++x) {
    if (x < p_len) {
      const double v = in[x * stride_in];
      while (!dq.empty() && better_or_equal(v, in[dq.back() * stride_in])) dq.pop_back();
      dq.push_back(x);
    }
    const std::int64_t lo = x - window + 1;
    while (dq.front() < lo) dq.pop_front();
    out[x * stride_out] = in[dq.front() * stride_in];
  }
}

struct Field3 {
  Index3 dims{1, 1, 1};
  std::vector<double> v;
  void resize(const Index3& d, double fill) {
    dims = d;
    v.assign(static_cast<std::size_t>(d[0] * d[1] * d[2]), fill);
  }
  double& at(std::int64_t i0, std::int64_t i1, std::int64_t i2) {
    return v[static_cast<std::size_t>((i0 * dims[1] + i1) * dims[2] + i2)];
  }
};

// Expand axis `axis` from p_len to out_len by the sliding extremum.
inline void window_pass(const Field3& in, int axis, std::int64_t window, std::int64_t out_len,
                        bool take_min, Field3& out) {
  Index3 od = in.dims;
  od[axis] = out_len;
  out.resize(od, 0.0);
  const Index3& id = in.dims;
  const std::int64_t in_stride[3] = {id[1] * id[2], id[2], 1};
  const std::int64_t out_stride[3] = {od[1] * od[2], od[2], 1};
  const int o1 = axis == 0 ? 1 : 0;
  const int o2 = axis == 2 ? 1 : 2;
  for (std::int64_t a = 0; a < id[o1]; ++a)
    for (std::int64_t b = 0; b < id[o2]; ++b) {
      const std::int64_t in_off = a * in_stride[o1] + b * in_stride[o2];
      const std::int64_t out_off = a * out_stride[o1] + b * out_stride[o2];
      window_extremum_line(in.v.data() + in_off, in_stride[axis], id[axis], window,
                           out.v.data() + out_off, out_stride[axis], out_len, take_min);
    }
}

// One size vector: per-position means -> per-cell extremum, merged into field.
inline void fold_size_into_field(const MeanTable& table, const Domain& d, const Index3& size,
                                 bool take_min, std::vector<double>& field) {
  Index3 pdims{1, 1, 1};
  for (int a = 0; a < d.dim; ++a) pdims[a] = d.shape[a] - size[a] + 1;
  Field3 cur;
  cur.resize(pdims, 0.0);
  Box b;
  b.size = size;
  const double skip = take_min ? kInf : -kInf;
  Index3 p;
  std::size_t flat = 0;
  for (p[0] = 0; p[0] < pdims[0]; ++p[0])
    for (p[1] = 0; p[1] < pdims[1]; ++p[1])
      for (p[2] = 0; p[2] < pdims[2]; ++p[2], ++flat) {
        b.lower = p;
        const auto m = table.box_mean(b);
        cur.v[flat] = m ? *m : skip;
      }
  Field3 next;
  for (int a = 0; a < d.dim; ++a) {
    window_pass(cur, a, size[a], d.shape[a], take_min, next);
    std::swap(cur, next);
  }
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double v = cur.v[i];
    if (take_min ? v < field[i] : v > field[i]) field[i] = v;
  }
}

inline GridFunction windowed_extremal_field(MeanKind kind, const Basis& basis,
                                            const GridFunction& f, const GridFunction* sigma,
                                            bool take_min) {
  const Domain& d = f.domain;
  MeanTable table(kind, f, sigma);
  std::vector<double> field(static_cast<std::size_t>(d.cell_count()), take_min ? kInf : -kInf);
  if (basis.kind == BasisKind::Cubes) {
    for (std::int64_t s = 1; s <= detail::cube_max_side(basis); ++s) {
      Index3 size{1, 1, 1};
      for (int a = 0; a < d.dim; ++a) size[a] = s;
      fold_size_into_field(table, d, size, take_min, field);
    }
  } else {  // Rectangles
    Index3 size{1, 1, 1};
    for (size[0] = 1; size[0] <= d.shape[0]; ++size[0]) {
      const std::int64_t s1max = d.dim > 1 ? d.shape[1] : 1;
      for (size[1] = 1; size[1] <= s1max; ++size[1]) {
        const std::int64_t s2max = d.dim > 2 ? d.shape[2] : 1;
        for (size[2] = 1; size[2] <= s2max; ++size[2])
          fold_size_into_field(table, d, size, take_min, field);
      }
    }
  }
  GridFunction out(d);
  for (std::size_t i = 0; i < field.size(); ++i) {
    double v = field[i];
    // Max route: -inf marks "no admissible set", which maps to 0. Min route:
    // every cell is in its own size-1 box, and +inf can be a genuine minimum.
    if (!take_min && v == -kInf) v = 0.0;
    out.values[i] = v;
  }
  return out;
}

inline GridFunction scatter_extremal_field(MeanKind kind, const Basis& basis,
                                           const GridFunction& f, const GridFunction* sigma,
                                           bool take_min, std::vector<Box>* witnesses) {
  const Domain& d = f.domain;
  const std::size_t n = static_cast<std::size_t>(d.cell_count());
  std::vector<double> field(n, take_min ? kInf : -kInf);
  std::vector<Box> best(witnesses ? n : 0);
  for_each_set(basis, [&](const Box& box) {
    const auto m = set_mean(kind, f, box, sigma);
    if (!m) return;
    const double v = *m;
    for_each_cell(box, [&](const Index3& c) {
      const std::size_t i = static_cast<std::size_t>(d.flat_index(c));
      const bool strictly = take_min ? v < field[i] : v > field[i];
      if (strictly) {
        field[i] = v;
        if (witnesses) best[i] = box;
      } else if (witnesses && v == field[i] && box < best[i]) {
        best[i] = box;
      }
    });
  });
  GridFunction out(d);
  for (std::size_t i = 0; i < n; ++i) {
    double v = field[i];
    if (!take_min && v == -kInf) v = 0.0;
    out.values[i] = v;
  }
  if (witnesses) *witnesses = std::move(best);
  return out;
}

}  // namespace detail

// Reference maximal operator. Witness tracking (per-cell attaining box, ties
// toward the canonically smallest) forces the enumerate-and-scatter route.
inline MaximalField maximal(MeanKind kind, const Basis& basis, const GridFunction& f,
                            const GridFunction* sigma = nullptr,
                            std::vector<Box>* witnesses = nullptr) {
  require_same_domain(basis.domain, f.domain);
  validate_basis(basis);
  if (witnesses || basis.kind == BasisKind::Dyadic)
    return detail::scatter_extremal_field(kind, basis, f, sigma, /*take_min=*/false, witnesses);
  return detail::windowed_extremal_field(kind, basis, f, sigma, /*take_min=*/false);
}

// Fast dyadic maximal: bottom-up aggregates, then a top-down sweep carrying
// the running ancestor maximum. Output agrees with maximal() on the dyadic
// family up to summation-order rounding.
inline MaximalField maximal_fast_dyadic(MeanKind kind, const GridFunction& f,
                                        const GridFunction* sigma = nullptr) {
  const Domain& d = f.domain;
  DyadicPyramid pyr(kind, f, sigma);
  const int top = pyr.top_level();
  std::vector<double> carry;  // running max at the current level
  for (int k = top; k >= 0; --k) {
    const Index3 shape = pyr.level_shape(k);
    const std::int64_t count = shape[0] * shape[1] * shape[2];
    std::vector<double> value(static_cast<std::size_t>(count));
    const Index3 up_shape = pyr.level_shape(k + 1);
    Index3 c;
    std::int64_t idx = 0;
    for (c[0] = 0; c[0] < shape[0]; ++c[0])
      for (c[1] = 0; c[1] < shape[1]; ++c[1])
        for (c[2] = 0; c[2] < shape[2]; ++c[2], ++idx) {
          double v = 0.0;  // off-union / no-ancestor base
          // On truncated (non power-of-two) axes the last nodes of a level
          // have no parent; they keep the base value.
          if (k < top && (c[0] >> 1) < up_shape[0] && (c[1] >> 1) < up_shape[1] &&
              (c[2] >> 1) < up_shape[2]) {
            const std::int64_t pi =
                ((c[0] >> 1) * up_shape[1] + (c[1] >> 1)) * up_shape[2] + (c[2] >> 1);
            v = carry[static_cast<std::size_t>(pi)];
          }
          const auto m = pyr.node_mean(k, idx);
          if (m && *m > v) v = *m;
          value[static_cast<std::size_t>(idx)] = v;
        }
    carry = std::move(value);
  }
  GridFunction out(d);
  out.values = std::move(carry);
  return out;
}

// Minimal operator (arithmetic infimum), Lebesgue averages only.
inline GridFunction minimal_operator(const Basis& basis, const GridFunction& f) {
  require_same_domain(basis.domain, f.domain);
  validate_basis(basis);
  if (basis.kind == BasisKind::Dyadic) {
    DyadicPyramid pyr(MeanKind::arithmetic(), f, nullptr);
    const int top = pyr.top_level();
    std::vector<double> carry;
    for (int k = top; k >= 0; --k) {
      const Index3 shape = pyr.level_shape(k);
      const std::int64_t count = shape[0] * shape[1] * shape[2];
      std::vector<double> value(static_cast<std::size_t>(count));
      const Index3 up_shape = pyr.level_shape(k + 1);
      Index3 c;
      std::int64_t idx = 0;
      for (c[0] = 0; c[0] < shape[0]; ++c[0])
        for (c[1] = 0; c[1] < shape[1]; ++c[1])
          for (c[2] = 0; c[2] < shape[2]; ++c[2], ++idx) {
            double v = kInf;
            if (k < top && (c[0] >> 1) < up_shape[0] && (c[1] >> 1) < up_shape[1] &&
                (c[2] >> 1) < up_shape[2]) {
              const std::int64_t pi =
                  ((c[0] >> 1) * up_shape[1] + (c[1] >> 1)) * up_shape[2] + (c[2] >> 1);
              v = carry[static_cast<std::size_t>(pi)];
            }
            const auto m = pyr.node_mean(k, idx);
            if (m && *m < v) v = *m;
            value[static_cast<std::size_t>(idx)] = v;
          }
      carry = std::move(value);
    }
    GridFunction out(f.domain);
    out.values = std::move(carry);
    return out;
  }
  return detail::windowed_extremal_field(MeanKind::arithmetic(), basis, f, nullptr,
                                         /*take_min=*/true);
}

// Dispatcher used by constants/experiments: fast tree route for the dyadic
// family, windowed route otherwise. Agrees with maximal() by construction.
inline MaximalField maximal_auto(MeanKind kind, const Basis& basis, const GridFunction& f,
                                 const GridFunction* sigma = nullptr) {
  require_same_domain(basis.domain, f.domain);
  if (basis.kind == BasisKind::Dyadic) return maximal_fast_dyadic(kind, f, sigma);
  return maximal(kind, basis, f, sigma);
}

// ---- harmonic -> geometric limit ---------------------------------------------

struct ConvergenceRow {
  double r;
  double sup_gap;
  double mean_gap;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;

  std::string csv() const {
    std::string out = "r,sup_gap,mean_gap\n";
    for (const auto& row : rows)
      out += format17(row.r) + "," + format17(row.sup_gap) + "," + format17(row.mean_gap) + "\n";
    return out;
  }
};

// Gap between the geometric maximal field and the power(-r) fields along a
// decreasing schedule of r. The gap is nonnegative and nonincreasing as r
// decreases; rows report it without clamping.
inline ConvergenceReport limit_harmonic_to_geometric(const Basis& basis, const GridFunction& f,
                                                     const std::vector<double>& schedule,
                                                     const GridFunction* sigma = nullptr) {
  for (double r : schedule)
    if (!(r > 0.0)) throw std::invalid_argument("schedule entries must be positive");
  const MaximalField geo = maximal_auto(MeanKind::geometric(), basis, f, sigma);
  ConvergenceReport report;
  for (double r : schedule) {
    const MaximalField low = maximal_auto(MeanKind::power(-r), basis, f, sigma);
    double sup = -kInf;
    long double total = 0.0L;
    std::int64_t finite = 0;
    for (std::size_t i = 0; i < geo.values.size(); ++i) {
      const double g = geo.values[i], l = low.values[i];
      double gap;
      if (std::isinf(g) && std::isinf(l)) gap = 0.0;
      else gap = g - l;
      sup = std::max(sup, gap);
      if (!std::isinf(gap)) {
        total += gap;
        ++finite;
      }
    }
    report.rows.push_back(
        {r, sup, finite ? static_cast<double>(total / finite) : 0.0});
  }
  return report;
}

// ---- stopping cubes ------------------------------------------------------------

// Maximal dyadic cubes whose harmonic sigma-average of f exceeds lambda.
// Their union is exactly the superlevel set {M^D_{-1,sigma} f > lambda};
// sigma-null subtrees carry no average and are skipped whole.
inline std::vector<Box> dyadic_stopping_cubes(const GridFunction& f, const GridFunction* sigma,
                                              double lambda) {
  DyadicPyramid pyr(MeanKind::harmonic(), f, sigma);
  std::vector<Box> out;
  const int top = pyr.top_level();

  auto descend = [&](auto&& self, int k, const Index3& node) -> void {
    const Index3 shape = pyr.level_shape(k);
    const std::int64_t idx = (node[0] * shape[1] + node[1]) * shape[2] + node[2];
    if (pyr.node_mass(k, idx) <= 0.0) return;  // sigma-null subtree
    const auto m = pyr.node_mean(k, idx);
    if (m && *m > lambda) {
      out.push_back(pyr.node_box(k, node));
      return;
    }
    if (k == 0) return;
    const int dim = f.domain.dim;
    for (int e0 = 0; e0 < (dim > 0 ? 2 : 1); ++e0)
      for (int e1 = 0; e1 < (dim > 1 ? 2 : 1); ++e1)
        for (int e2 = 0; e2 < (dim > 2 ? 2 : 1); ++e2)
          self(self, k - 1, Index3{2 * node[0] + e0, 2 * node[1] + e1, 2 * node[2] + e2});
  };

  // Descend from every parentless node: the top level, plus the trailing
  // nodes of truncated (non power-of-two) axes that no larger cube covers.
  Index3 t;
  for (int k = top; k >= 0; --k) {
    const Index3 shape = pyr.level_shape(k);
    const Index3 up = pyr.level_shape(k + 1);
    for (t[0] = 0; t[0] < shape[0]; ++t[0])
      for (t[1] = 0; t[1] < shape[1]; ++t[1])
        for (t[2] = 0; t[2] < shape[2]; ++t[2]) {
          const bool parentless = k == top || (t[0] >> 1) >= up[0] ||
                                  (t[1] >> 1) >= up[1] || (t[2] >> 1) >= up[2];
          if (parentless) descend(descend, k, t);
        }
  }
  return out;
}

}  // namespace maxop
