#pragma once

// Means of nonnegative extended-real data over cell boxes, optionally against
// a weight sigma: arithmetic, harmonic (reciprocal of the mean reciprocal),
// geometric (exponential of the mean log), and power means of exponent t != 0
// with Power(1) = arithmetic and Power(-1) = harmonic.
//
// Conventions: a zero inside a harmonic/geometric mean forces the mean to 0
// (the zero wins over +inf for geometric); +inf inside an arithmetic or
// positive-power mean forces +inf. Cells with sigma = 0 contribute nothing,
// measure-theoretically, even where the integrand is infinite. A set with
// sigma-mass 0 has no mean (std::nullopt) and is skipped in suprema.
//
// Three evaluation backends share one finalize step:
//   MeanAccumulator - streaming, per set, log-sum-exp for power means
//   MeanTable       - prefix-sum tables, O(1) per box, for cube/rectangle scans
//   DyadicPyramid   - bottom-up per-level aggregates for dyadic cubes
// Power means in MeanTable are rescaled by the extreme positive value so
// every table term lies in [0, 1]; no overflow is possible and the exact
// log-scale is restored in finalize.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "extreal.hpp"
#include "grid.hpp"

namespace maxop {

struct MeanKind {
  enum class Tag { Arithmetic, Harmonic, Geometric, Power };
  Tag tag = Tag::Arithmetic;
  double exponent = 1.0;  // only meaningful for Power

  static MeanKind arithmetic() { return {Tag::Arithmetic, 1.0}; }
  static MeanKind harmonic() { return {Tag::Harmonic, -1.0}; }
  static MeanKind geometric() { return {Tag::Geometric, 0.0}; }
  static MeanKind power(double t) {
    if (t == 0.0) throw std::invalid_argument("power mean exponent must be nonzero; use geometric()");
    if (std::isnan(t) || std::isinf(t)) throw std::invalid_argument("power mean exponent must be finite");
    if (t == 1.0) return arithmetic();
    if (t == -1.0) return harmonic();
    return {Tag::Power, t};
  }

  bool is_power() const { return tag == Tag::Power; }
  std::string name() const {
    switch (tag) {
      case Tag::Arithmetic: return "arithmetic";
      case Tag::Harmonic: return "harmonic";
      case Tag::Geometric: return "geometric";
      case Tag::Power: return "power(" + format17(exponent) + ")";
    }
    return "?";
  }
};

namespace detail {

// Aggregate statistics of one set, sufficient to evaluate its mean.
struct MeanStats {
  double mass = 0.0;     // sigma-mass (or cell count for Lebesgue)
  double main = 0.0;     // linear accumulator (arithmetic/harmonic/geometric)
  double logsum = -kInf; // log of the power-mean numerator
  std::int64_t zeros = 0;
  std::int64_t infs = 0;
};

inline std::optional<double> finalize_mean(const MeanKind& kind, const MeanStats& s) {
  if (s.mass <= 0.0) return std::nullopt;
  switch (kind.tag) {
    case MeanKind::Tag::Arithmetic:
      if (s.infs > 0) return kInf;
      return s.main / s.mass;
    case MeanKind::Tag::Harmonic:
      if (s.zeros > 0) return 0.0;
      return s.mass / s.main;  // main == 0 (f == inf a.e.) gives +inf
    case MeanKind::Tag::Geometric:
      if (s.zeros > 0) return 0.0;
      if (s.infs > 0) return kInf;
      return std::exp(s.main / s.mass);
    case MeanKind::Tag::Power: {
      const double t = kind.exponent;
      if (t < 0.0 && s.zeros > 0) return 0.0;
      if (t > 0.0 && s.infs > 0) return kInf;
      return std::exp((s.logsum - std::log(s.mass)) / t);
    }
  }
  return std::nullopt;
}

}  // namespace detail

class MeanAccumulator {
 public:
  explicit MeanAccumulator(MeanKind kind) : kind_(kind) {}

  void add(double value, double weight = 1.0) {
    if (weight <= 0.0) return;  // sigma-null cell
    mass_ += weight;
    switch (kind_.tag) {
      case MeanKind::Tag::Arithmetic:
        if (std::isinf(value)) ++infs_;
        else main_ += static_cast<long double>(weight) * value;
        break;
      case MeanKind::Tag::Harmonic:
        if (value == 0.0) ++zeros_;
        else main_ += static_cast<long double>(weight) / value;  // value=inf adds 0
        break;
      case MeanKind::Tag::Geometric:
        if (value == 0.0) ++zeros_;
        else if (std::isinf(value)) ++infs_;
        else main_ += static_cast<long double>(weight) * std::log(value);
        break;
      case MeanKind::Tag::Power: {
        const double t = kind_.exponent;
        if (value == 0.0) {
          if (t < 0.0) ++zeros_;
          // t > 0: the term is exactly 0
        } else if (std::isinf(value)) {
          if (t > 0.0) ++infs_;
          // t < 0: the term is exactly 0
        } else {
          log_add(std::log(weight) + t * std::log(value));
        }
        break;
      }
    }
  }

  std::optional<double> mean() const {
    detail::MeanStats s;
    s.mass = static_cast<double>(mass_);
    s.main = static_cast<double>(main_);
    s.logsum = log_terms_ == 0.0L ? -kInf
                                  : log_max_ + static_cast<double>(std::log(log_terms_));
    s.zeros = zeros_;
    s.infs = infs_;
    return detail::finalize_mean(kind_, s);
  }

 private:
  void log_add(double x) {  // streaming log-sum-exp
    if (log_terms_ == 0.0L) {
      log_max_ = x;
      log_terms_ = 1.0L;
    } else if (x <= log_max_) {
      log_terms_ += std::exp(static_cast<long double>(x - log_max_));
    } else {
      log_terms_ = log_terms_ * std::exp(static_cast<long double>(log_max_ - x)) + 1.0L;
      log_max_ = x;
    }
  }

  MeanKind kind_;
  long double mass_ = 0.0L;
  long double main_ = 0.0L;
  double log_max_ = -kInf;
  long double log_terms_ = 0.0L;
  std::int64_t zeros_ = 0;
  std::int64_t infs_ = 0;
};

inline std::optional<double> set_mean(MeanKind kind, const GridFunction& f, const Box& box,
                                      const GridFunction* sigma = nullptr) {
  if (!box.inside(f.domain)) throw std::invalid_argument("box not inside domain");
  if (sigma) {
    require_same_domain(f.domain, sigma->domain);
    require_weight(*sigma, "sigma");
  }
  MeanAccumulator acc(kind);
  for_each_cell(box, [&](const Index3& c) {
    const std::int64_t i = f.domain.flat_index(c);
    acc.add(f[i], sigma ? (*sigma)[i] : 1.0);
  });
  return acc.mean();
}

inline std::optional<double> set_mean(MeanKind kind, const GridFunction& f, const CellSet& cells,
                                      const GridFunction* sigma = nullptr) {
  require_same_domain(f.domain, cells.domain);
  if (sigma) {
    require_same_domain(f.domain, sigma->domain);
    require_weight(*sigma, "sigma");
  }
  MeanAccumulator acc(kind);
  for (std::int64_t i = 0; i < f.domain.cell_count(); ++i)
    if (cells.contains(i)) acc.add(f[i], sigma ? (*sigma)[i] : 1.0);
  return acc.mean();
}

namespace detail {

// Prefix-sum (summed-area) table over cells; O(1) box sums in up to 3 axes.
// Long-double accumulation keeps box sums accurate to ~1e-18 relative even
// after the inclusion-exclusion cancellation.
template <class T>
class SumTable {
 public:
  SumTable() = default;

  template <class Gen>
  SumTable(const Domain& d, Gen&& gen) {
    np_ = {d.shape[0] + 1, d.shape[1] + 1, d.shape[2] + 1};
    p_.assign(static_cast<std::size_t>(np_[0] * np_[1] * np_[2]), T{});
    for (std::int64_t i0 = 1; i0 < np_[0]; ++i0)
      for (std::int64_t i1 = 1; i1 < np_[1]; ++i1)
        for (std::int64_t i2 = 1; i2 < np_[2]; ++i2) {
          const T v = gen(d.flat_index({i0 - 1, i1 - 1, i2 - 1}));
          at(i0, i1, i2) = v + at(i0 - 1, i1, i2) + at(i0, i1 - 1, i2) + at(i0, i1, i2 - 1) -
                           at(i0 - 1, i1 - 1, i2) - at(i0 - 1, i1, i2 - 1) -
                           at(i0, i1 - 1, i2 - 1) + at(i0 - 1, i1 - 1, i2 - 1);
        }
  }

  T box_sum(const Box& b) const {
    const std::int64_t l0 = b.lower[0], l1 = b.lower[1], l2 = b.lower[2];
    const std::int64_t u0 = l0 + b.size[0], u1 = l1 + b.size[1], u2 = l2 + b.size[2];
    return at(u0, u1, u2) - at(l0, u1, u2) - at(u0, l1, u2) - at(u0, u1, l2) +
           at(l0, l1, u2) + at(l0, u1, l2) + at(u0, l1, l2) - at(l0, l1, l2);
  }

  bool empty() const { return p_.empty(); }

 private:
  T& at(std::int64_t i0, std::int64_t i1, std::int64_t i2) {
    return p_[static_cast<std::size_t>((i0 * np_[1] + i1) * np_[2] + i2)];
  }
  const T& at(std::int64_t i0, std::int64_t i1, std::int64_t i2) const {
    return p_[static_cast<std::size_t>((i0 * np_[1] + i1) * np_[2] + i2)];
  }

  Index3 np_{1, 1, 1};
  std::vector<T> p_;
};

}  // namespace detail

// Averages of one extended-real transform (entries in [-inf, +inf]) over
// arbitrary boxes. +-inf entries are counted separately so the finite prefix
// sums stay NaN-free.
class BoxAverager {
 public:
  template <class Gen>
  BoxAverager(const Domain& d, Gen&& gen) : domain_(d) {
    const std::int64_t n = d.cell_count();
    std::vector<double> g(static_cast<std::size_t>(n));
    bool any_pos = false, any_neg = false;
    for (std::int64_t i = 0; i < n; ++i) {
      g[static_cast<std::size_t>(i)] = gen(i);
      if (g[static_cast<std::size_t>(i)] == kInf) any_pos = true;
      if (g[static_cast<std::size_t>(i)] == -kInf) any_neg = true;
    }
    finite_ = detail::SumTable<long double>(d, [&](std::int64_t i) -> long double {
      const double v = g[static_cast<std::size_t>(i)];
      return std::isinf(v) ? 0.0L : static_cast<long double>(v);
    });
    if (any_pos)
      pos_inf_ = detail::SumTable<std::int64_t>(
          d, [&](std::int64_t i) -> std::int64_t { return g[static_cast<std::size_t>(i)] == kInf; });
    if (any_neg)
      neg_inf_ = detail::SumTable<std::int64_t>(
          d, [&](std::int64_t i) -> std::int64_t { return g[static_cast<std::size_t>(i)] == -kInf; });
  }

  // Sum over the box with extended-real absorption; +inf and -inf together
  // cannot occur for the single-signed transforms used here.
  double box_sum(const Box& b) const {
    const bool pos = !pos_inf_.empty() && pos_inf_.box_sum(b) > 0;
    const bool neg = !neg_inf_.empty() && neg_inf_.box_sum(b) > 0;
    if (pos && neg) throw std::logic_error("mixed +inf and -inf in one transform");
    if (pos) return kInf;
    if (neg) return -kInf;
    return static_cast<double>(finite_.box_sum(b));
  }

  double box_average(const Box& b) const {
    const double s = box_sum(b);
    if (std::isinf(s)) return s;
    return s / static_cast<double>(b.cell_count());
  }

 private:
  Domain domain_;
  detail::SumTable<long double> finite_;
  detail::SumTable<std::int64_t> pos_inf_, neg_inf_;
};

// O(1) per-box means of f (against sigma) for one MeanKind.
class MeanTable {
 public:
  MeanTable(MeanKind kind, const GridFunction& f, const GridFunction* sigma)
      : kind_(kind), weighted_(sigma != nullptr) {
    const Domain& d = f.domain;
    if (sigma) {
      require_same_domain(d, sigma->domain);
      require_weight(*sigma, "sigma");
      mass_ = detail::SumTable<long double>(
          d, [&](std::int64_t i) -> long double { return (*sigma)[i]; });
    }
    auto w_at = [&](std::int64_t i) { return sigma ? (*sigma)[i] : 1.0; };

    if (kind.is_power()) {
      // Rescale so all table terms lie in [0, 1]: divide by the largest
      // positive value for t > 0, the smallest for t < 0.
      const double t = kind.exponent;
      double scale = 1.0;
      bool found = false;
      for (std::int64_t i = 0; i < d.cell_count(); ++i) {
        const double v = f[i];
        if (v <= 0.0 || std::isinf(v)) continue;
        if (!found) scale = v, found = true;
        else scale = t > 0.0 ? std::max(scale, v) : std::min(scale, v);
      }
      log_scale_ = t * std::log(scale);
      main_ = detail::SumTable<long double>(d, [&](std::int64_t i) -> long double {
        const double v = f[i];
        if (v <= 0.0 || std::isinf(v)) return 0.0L;
        return static_cast<long double>(w_at(i)) *
               std::exp(static_cast<long double>(t) * std::log(static_cast<long double>(v) / scale));
      });
    } else {
      main_ = detail::SumTable<long double>(d, [&](std::int64_t i) -> long double {
        const double v = f[i];
        const long double w = w_at(i);
        switch (kind_.tag) {
          case MeanKind::Tag::Arithmetic: return std::isinf(v) ? 0.0L : w * v;
          case MeanKind::Tag::Harmonic: return v == 0.0 ? 0.0L : w / v;
          case MeanKind::Tag::Geometric:
            return (v == 0.0 || std::isinf(v)) ? 0.0L : w * std::log(static_cast<long double>(v));
          default: return 0.0L;
        }
      });
    }

    auto count_if = [&](auto&& pred) -> detail::SumTable<std::int64_t> {
      bool any = false;
      for (std::int64_t i = 0; i < d.cell_count(); ++i)
        if (w_at(i) > 0.0 && pred(f[i])) {
          any = true;
          break;
        }
      if (!any) return {};
      return detail::SumTable<std::int64_t>(d, [&](std::int64_t i) -> std::int64_t {
        return w_at(i) > 0.0 && pred(f[i]);
      });
    };
    const double t = kind.exponent;
    const bool want_zeros = kind.tag == MeanKind::Tag::Harmonic ||
                            kind.tag == MeanKind::Tag::Geometric || (kind.is_power() && t < 0.0);
    const bool want_infs = kind.tag == MeanKind::Tag::Arithmetic ||
                           kind.tag == MeanKind::Tag::Geometric || (kind.is_power() && t > 0.0);
    if (want_zeros) zeros_ = count_if([](double v) { return v == 0.0; });
    if (want_infs) infs_ = count_if([](double v) { return std::isinf(v); });
  }

  std::optional<double> box_mean(const Box& b) const {
    detail::MeanStats s;
    s.mass = weighted_ ? static_cast<double>(mass_.box_sum(b))
                       : static_cast<double>(b.cell_count());
    if (!zeros_.empty()) s.zeros = zeros_.box_sum(b);
    if (!infs_.empty()) s.infs = infs_.box_sum(b);
    if (kind_.is_power()) {
      const long double raw = main_.box_sum(b);
      s.logsum = raw <= 0.0L ? -kInf : static_cast<double>(std::log(raw)) + log_scale_;
    } else {
      s.main = static_cast<double>(main_.box_sum(b));
    }
    return detail::finalize_mean(kind_, s);
  }

 private:
  MeanKind kind_;
  bool weighted_;
  double log_scale_ = 0.0;
  detail::SumTable<long double> mass_, main_;
  detail::SumTable<std::int64_t> zeros_, infs_;
};

// Bottom-up aggregates over the dyadic tree; node means for every dyadic
// cube in O(total cells), shared by the fast maximal/minimal sweeps and the
// stopping-cube decomposition.
class DyadicPyramid {
 public:
  DyadicPyramid(MeanKind kind, const GridFunction& f, const GridFunction* sigma)
      : kind_(kind), domain_(f.domain) {
    if (sigma) {
      require_same_domain(f.domain, sigma->domain);
      require_weight(*sigma, "sigma");
    }
    // Highest level at which every axis still has at least one whole node:
    // floor(log2(shape)). Truncated (non power-of-two) axes simply stop early.
    int kmax = 62;
    for (int a = 0; a < domain_.dim; ++a) {
      const auto n = static_cast<std::uint64_t>(domain_.shape[a]);
      kmax = std::min(kmax, static_cast<int>(std::bit_width(n)) - 1);
    }
    levels_.resize(static_cast<std::size_t>(kmax) + 1);

    // Leaves.
    Level& leaf = levels_[0];
    const std::int64_t n = domain_.cell_count();
    leaf.resize(n, kind_.is_power());
    for (std::int64_t i = 0; i < n; ++i) {
      const double w = sigma ? (*sigma)[i] : 1.0;
      const double v = f[i];
      leaf.mass[static_cast<std::size_t>(i)] = w;
      if (w <= 0.0) {
        if (kind_.is_power()) leaf.main[static_cast<std::size_t>(i)] = -kInf;
        continue;
      }
      switch (kind_.tag) {
        case MeanKind::Tag::Arithmetic:
          if (std::isinf(v)) leaf.infs[static_cast<std::size_t>(i)] = 1;
          else leaf.main[static_cast<std::size_t>(i)] = w * v;
          break;
        case MeanKind::Tag::Harmonic:
          if (v == 0.0) leaf.zeros[static_cast<std::size_t>(i)] = 1;
          else leaf.main[static_cast<std::size_t>(i)] = w / v;
          break;
        case MeanKind::Tag::Geometric:
          if (v == 0.0) leaf.zeros[static_cast<std::size_t>(i)] = 1;
          else if (std::isinf(v)) leaf.infs[static_cast<std::size_t>(i)] = 1;
          else leaf.main[static_cast<std::size_t>(i)] = w * std::log(v);
          break;
        case MeanKind::Tag::Power: {
          const double t = kind_.exponent;
          double logterm = -kInf;
          if (v == 0.0) {
            if (t < 0.0) leaf.zeros[static_cast<std::size_t>(i)] = 1;
          } else if (std::isinf(v)) {
            if (t > 0.0) leaf.infs[static_cast<std::size_t>(i)] = 1;
          } else {
            logterm = std::log(w) + t * std::log(v);
          }
          leaf.main[static_cast<std::size_t>(i)] = logterm;
          break;
        }
      }
    }

    // Upward combination, 2^dim children per node.
    for (int k = 1; k <= kmax; ++k) {
      const Index3 shape = level_shape(k);
      const Index3 child_shape = level_shape(k - 1);
      Level& up = levels_[static_cast<std::size_t>(k)];
      const Level& lo = levels_[static_cast<std::size_t>(k - 1)];
      up.resize(shape[0] * shape[1] * shape[2], kind_.is_power());
      Index3 c;
      for (c[0] = 0; c[0] < shape[0]; ++c[0])
        for (c[1] = 0; c[1] < shape[1]; ++c[1])
          for (c[2] = 0; c[2] < shape[2]; ++c[2]) {
            const std::size_t idx =
                static_cast<std::size_t>((c[0] * shape[1] + c[1]) * shape[2] + c[2]);
            double mass = 0.0, lin = 0.0, logsum = -kInf;
            std::int64_t zeros = 0, infs = 0;
            const int e0max = domain_.dim > 0 ? 2 : 1;
            const int e1max = domain_.dim > 1 ? 2 : 1;
            const int e2max = domain_.dim > 2 ? 2 : 1;
            for (int e0 = 0; e0 < e0max; ++e0)
              for (int e1 = 0; e1 < e1max; ++e1)
                for (int e2 = 0; e2 < e2max; ++e2) {
                  const std::size_t ci = static_cast<std::size_t>(
                      ((2 * c[0] + e0) * child_shape[1] + (2 * c[1] + e1)) * child_shape[2] +
                      (2 * c[2] + e2));
                  mass += lo.mass[ci];
                  if (kind_.is_power()) logsum = log_add_exp(logsum, lo.main[ci]);
                  else lin += lo.main[ci];
                  if (!lo.zeros.empty()) zeros += lo.zeros[ci];
                  if (!lo.infs.empty()) infs += lo.infs[ci];
                }
            up.mass[idx] = mass;
            up.main[idx] = kind_.is_power() ? logsum : lin;
            if (!up.zeros.empty()) up.zeros[idx] = zeros;
            if (!up.infs.empty()) up.infs[idx] = infs;
          }
    }
  }

  int top_level() const { return static_cast<int>(levels_.size()) - 1; }

  Index3 level_shape(int k) const {
    Index3 s{1, 1, 1};
    for (int a = 0; a < domain_.dim; ++a) s[a] = domain_.shape[a] >> k;
    return s;
  }

  std::optional<double> node_mean(int k, std::int64_t idx) const {
    const Level& lv = levels_[static_cast<std::size_t>(k)];
    detail::MeanStats s;
    s.mass = lv.mass[static_cast<std::size_t>(idx)];
    if (kind_.is_power()) s.logsum = lv.main[static_cast<std::size_t>(idx)];
    else s.main = lv.main[static_cast<std::size_t>(idx)];
    if (!lv.zeros.empty()) s.zeros = lv.zeros[static_cast<std::size_t>(idx)];
    if (!lv.infs.empty()) s.infs = lv.infs[static_cast<std::size_t>(idx)];
    return detail::finalize_mean(kind_, s);
  }

  double node_mass(int k, std::int64_t idx) const {
    return levels_[static_cast<std::size_t>(k)].mass[static_cast<std::size_t>(idx)];
  }

  Box node_box(int k, const Index3& node) const {
    Box b;
    const std::int64_t side = std::int64_t{1} << k;
    for (int a = 0; a < 3; ++a) {
      b.lower[a] = a < domain_.dim ? node[a] * side : 0;
      b.size[a] = a < domain_.dim ? side : 1;
    }
    return b;
  }

 private:
  struct Level {
    std::vector<double> mass, main;
    std::vector<std::int64_t> zeros, infs;
    void resize(std::int64_t n, bool power) {
      mass.assign(static_cast<std::size_t>(n), 0.0);
      main.assign(static_cast<std::size_t>(n), power ? -kInf : 0.0);
      zeros.assign(static_cast<std::size_t>(n), 0);
      infs.assign(static_cast<std::size_t>(n), 0);
    }
  };

  MeanKind kind_;
  Domain domain_;
  std::vector<Level> levels_;
};

}  // namespace maxop
