#pragma once

// Two-weight machinery: testing-condition constants, empirical operator-norm
// estimation (strong and weak type), and the greedy sparse-subfamily
// selection.
//
// Key simplification used throughout the testing constants: the test field
// M_*(w^{-1} 1_F) vanishes on any basis set that leaves F (a zero value kills
// both harmonic and geometric means), so only sets S contained in F
// contribute, each with the constant value 1/mean_S(w). The field is
// therefore assembled exactly from O(1) box means, never from extended-real
// cell values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "basis.hpp"
#include "extreal.hpp"
#include "grid.hpp"
#include "means.hpp"
#include "operators.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace maxop {

// ---- testing constants -----------------------------------------------------------

struct TestingReport {
  std::string op;  // "m-1" or "m0"
  double p = 1.0;
  BasisKind basis = BasisKind::Dyadic;
  int dim = 1;
  double constant = 0.0;  // max ratio found; lower bound for the sup
  std::int64_t tried = 0;  // candidates evaluated (skipped sigma-null ones included)
  std::optional<SetUnion> worst;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["op"] = op;
    j["p"] = p;
    j["basis"] = basis_name(basis);
    j["constant"] = std::isinf(constant) ? nlohmann::ordered_json("inf")
                                         : nlohmann::ordered_json(constant);
    j["tried"] = tried;
    j["worst"] = worst ? union_to_json(*worst, dim) : nlohmann::ordered_json(nullptr);
    return j;
  }
};

namespace detail {

// Enumerate every basis set contained in box `outer` (which must itself be a
// set of the family).
template <typename Fn>
void for_each_set_in_box(const Basis& basis, const Box& outer, Fn&& fn) {
  const int dim = basis.domain.dim;
  Box b;
  switch (basis.kind) {
    case BasisKind::Dyadic: {
      const std::int64_t side = outer.size[0];
      for (std::int64_t step = 1; step <= side; step *= 2) {
        for (int a = 0; a < 3; ++a) b.size[a] = a < dim ? step : 1;
        Index3 n{1, 1, 1};
        for (int a = 0; a < dim; ++a) n[a] = outer.size[a] / step;
        Index3 i;
        for (i[0] = 0; i[0] < n[0]; ++i[0])
          for (i[1] = 0; i[1] < n[1]; ++i[1])
            for (i[2] = 0; i[2] < n[2]; ++i[2]) {
              for (int a = 0; a < 3; ++a) b.lower[a] = outer.lower[a] + i[a] * step;
              fn(b);
            }
      }
      return;
    }
    case BasisKind::Cubes: {
      const std::int64_t side = outer.size[0];
      for (std::int64_t s = 1; s <= side; ++s) {
        for (int a = 0; a < 3; ++a) b.size[a] = a < dim ? s : 1;
        Index3 i;
        const auto hi = [&](int a) { return a < dim ? outer.size[a] - s : 0; };
        for (i[0] = 0; i[0] <= hi(0); ++i[0])
          for (i[1] = 0; i[1] <= hi(1); ++i[1])
            for (i[2] = 0; i[2] <= hi(2); ++i[2]) {
              for (int a = 0; a < 3; ++a) b.lower[a] = outer.lower[a] + (a < dim ? i[a] : 0);
              fn(b);
            }
      }
      return;
    }
    case BasisKind::Rectangles: {
      Index3 s;
      const auto smax = [&](int a) { return a < dim ? outer.size[a] : 1; };
      for (s[0] = 1; s[0] <= smax(0); ++s[0])
        for (s[1] = 1; s[1] <= smax(1); ++s[1])
          for (s[2] = 1; s[2] <= smax(2); ++s[2]) {
            b.size = s;
            Index3 i;
            for (i[0] = 0; i[0] <= smax(0) - s[0]; ++i[0])
              for (i[1] = 0; i[1] <= smax(1) - s[1]; ++i[1])
                for (i[2] = 0; i[2] <= smax(2) - s[2]; ++i[2]) {
                  for (int a = 0; a < 3; ++a) b.lower[a] = outer.lower[a] + i[a];
                  fn(b);
                }
          }
      return;
    }
  }
}

// Shared evaluator for both testing constants. `table` holds the O(1) means
// of the tucked weight (arithmetic of sigma for m-1, geometric of v for m0);
// a contributing set S scores 1/mean_S. `den` is sigma(F) in cell units for
// the harmonic constant and |F| in cells for the geometric one.
struct TestingRatioEngine {
  const Basis& basis;
  const MeanTable& table;
  const GridFunction& u;
  double p;
  bool lebesgue_denominator;      // |F| instead of sigma(F)
  const GridFunction* sigma;      // used when !lebesgue_denominator

  // Ratio for a single basis set F: enumerate sets inside it.
  std::optional<double> single(const Box& f) const {
    const Domain& d = basis.domain;
    const std::int64_t cells = f.cell_count();
    std::vector<double> local(static_cast<std::size_t>(cells), 0.0);
    for_each_set_in_box(basis, f, [&](const Box& s) {
      const auto mean = table.box_mean(s);
      const double r = mean ? reciprocal(*mean) : 0.0;
      if (r <= 0.0) return;
      for_each_cell(s, [&](const Index3& c) {
        std::int64_t idx = 0;
        for (int a = 0; a < 3; ++a) idx = idx * f.size[a] + (c[a] - f.lower[a]);
        double& slot = local[static_cast<std::size_t>(idx)];
        if (r > slot) slot = r;
      });
    });
    long double num = 0.0L;
    long double den = 0.0L;
    std::int64_t idx = 0;
    bool inf_num = false;
    for_each_cell(f, [&](const Index3& c) {
      const std::int64_t flat = d.flat_index(c);
      const double uw = u.values[static_cast<std::size_t>(flat)];
      const double v = local[static_cast<std::size_t>(idx++)];
      if (uw > 0.0) {
        if (std::isinf(v)) inf_num = true;
        else num += std::pow(static_cast<long double>(v), static_cast<long double>(p)) * uw;
      }
      den += lebesgue_denominator ? 1.0L : sigma->values[static_cast<std::size_t>(flat)];
    });
    if (den <= 0.0L) return std::nullopt;  // sigma-null F
    if (inf_num) return kInf;
    return static_cast<double>(num / den);
  }

  // Ratio for a finite union F: scan all sets, keep those contained in F.
  std::optional<double> whole_union(const SetUnion& f) const {
    const Domain& d = basis.domain;
    SumTable<std::int64_t> counts(d, [&](std::int64_t i) {
      return static_cast<std::int64_t>(f.cells.mask[static_cast<std::size_t>(i)]);
    });
    std::vector<double> field(static_cast<std::size_t>(d.cell_count()), 0.0);
    for_each_set(basis, [&](const Box& s) {
      if (counts.box_sum(s) != s.cell_count()) return;
      const auto mean = table.box_mean(s);
      const double r = mean ? reciprocal(*mean) : 0.0;
      if (r <= 0.0) return;
      for_each_cell(s, [&](const Index3& c) {
        double& slot = field[static_cast<std::size_t>(d.flat_index(c))];
        if (r > slot) slot = r;
      });
    });
    long double num = 0.0L;
    long double den = 0.0L;
    bool inf_num = false;
    for (std::size_t i = 0; i < field.size(); ++i) {
      if (!f.cells.mask[i]) continue;
      const double uw = u.values[i];
      if (uw > 0.0) {
        if (std::isinf(field[i])) inf_num = true;
        else num += std::pow(static_cast<long double>(field[i]), static_cast<long double>(p)) * uw;
      }
      den += lebesgue_denominator ? 1.0L : sigma->values[i];
    }
    if (den <= 0.0L) return std::nullopt;
    if (inf_num) return kInf;
    return static_cast<double>(num / den);
  }
};

inline TestingReport testing_constant_impl(const char* op, const GridFunction& u,
                                           const GridFunction& w, MeanKind tucked_kind,
                                           bool lebesgue_denominator, const Basis& basis, double p,
                                           std::int64_t union_budget, std::uint64_t seed) {
  require_same_domain(u.domain, basis.domain);
  require_same_domain(w.domain, basis.domain);
  require_weight(u, "u");
  require_weight(w, "w");
  validate_basis(basis);
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("p must be positive");
  if (union_budget < 0) throw std::invalid_argument("union budget must be >= 0");

  MeanTable table(tucked_kind, w, nullptr);
  const TestingRatioEngine engine{basis, table, u, p, lebesgue_denominator,
                                  lebesgue_denominator ? nullptr : &w};
  TestingReport rep;
  rep.op = op;
  rep.p = p;
  rep.basis = basis.kind;
  rep.dim = basis.domain.dim;

  // Phase 1: every single basis set, chunked deterministically.
  struct Slot {
    double value = 0.0;
    Box box;
    bool has = false;
  };
  const std::int64_t total = count_sets(basis);
  const std::int64_t chunks =
      (thread_count() > 1 && total >= 64)
          ? std::min<std::int64_t>(total, std::int64_t{thread_count()} * 8)
          : 1;
  std::vector<Slot> slots(static_cast<std::size_t>(chunks));
  parallel_for(chunks, [&](std::int64_t chunk) {
    const std::int64_t lo = total * chunk / chunks;
    const std::int64_t hi = total * (chunk + 1) / chunks;
    Slot s;
    for (std::int64_t i = lo; i < hi; ++i) {
      const Box b = nth_set(basis, i);
      const auto v = engine.single(b);
      if (!v) continue;
      if (!s.has || *v > s.value || (*v == s.value && b < s.box)) {
        if (!s.has || *v > s.value) {
          s.value = *v;
          s.box = b;
          s.has = true;
        } else if (b < s.box) {
          s.box = b;
        }
      }
    }
    slots[static_cast<std::size_t>(chunk)] = s;
  });
  rep.tried = total;
  Slot best_single;
  for (const Slot& s : slots)
    if (s.has) {
      if (!best_single.has || s.value > best_single.value) best_single = s;
      else if (s.value == best_single.value && s.box < best_single.box) best_single.box = s.box;
    }

  // Phase 2: random unions from per-trial substreams; ties keep the earliest.
  struct USlot {
    double value = 0.0;
    std::optional<SetUnion> un;
  };
  std::vector<USlot> uslots(static_cast<std::size_t>(union_budget));
  parallel_for(union_budget, [&](std::int64_t t) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(t));
    SetUnion f = random_union(basis, 1 + rng.next_below(4), rng);
    const auto v = engine.whole_union(f);
    if (v) uslots[static_cast<std::size_t>(t)] = {*v, std::move(f)};
  });
  rep.tried += union_budget;

  double best_union_value = 0.0;
  const SetUnion* best_union = nullptr;
  for (const USlot& s : uslots)
    if (s.un && (!best_union || s.value > best_union_value)) {
      best_union_value = s.value;
      best_union = &*s.un;
    }

  if (best_single.has && (!best_union || best_single.value >= best_union_value)) {
    rep.constant = best_single.value;
    SetUnion w1;
    w1.members = {best_single.box};
    CellSet cs(basis.domain);
    cs.insert(best_single.box);
    w1.cells = std::move(cs);
    rep.worst = std::move(w1);
  } else if (best_union) {
    rep.constant = best_union_value;
    rep.worst = *best_union;
  }
  return rep;
}

}  // namespace detail

// Testing constant for the harmonic operator: max over tried F of
// integral_F M_{-1}(sigma^{-1} 1_F)^p u / sigma(F). F runs over every single
// basis set plus union_budget random finite unions.
inline TestingReport testing_constant_harmonic(const GridFunction& u, const GridFunction& sigma,
                                               const Basis& basis, double p,
                                               std::int64_t union_budget = 64,
                                               std::uint64_t seed = 1) {
  return detail::testing_constant_impl("m-1", u, sigma, MeanKind::arithmetic(),
                                       /*lebesgue_denominator=*/false, basis, p, union_budget,
                                       seed);
}

// Testing constant for the geometric operator: max over tried F of
// integral_F M_0(v^{-1} 1_F)^p u / |F|.
inline TestingReport testing_constant_geometric(const GridFunction& u, const GridFunction& v,
                                                const Basis& basis, double p,
                                                std::int64_t union_budget = 64,
                                                std::uint64_t seed = 1) {
  return detail::testing_constant_impl("m0", u, v, MeanKind::geometric(),
                                       /*lebesgue_denominator=*/true, basis, p, union_budget,
                                       seed);
}

// ---- empirical operator norms ---------------------------------------------------

struct NormEstimate {
  std::string op;
  double p = 1.0;
  BasisKind basis = BasisKind::Dyadic;
  double strong_ratio = 0.0;  // best ||M_*(f/sigma)||^p_{L^p(u)} / ||f||^p_{L^p(sigma)}
  double weak_ratio = 0.0;    // best lambda^p u({field > lambda}) / ||f||^p_{L^p(sigma)}
  double lambda = 0.0;        // attaining level of the weak ratio
  std::int64_t trials = 0;
  GridFunction strong_witness;
  GridFunction weak_witness;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["op"] = op;
    j["p"] = p;
    j["basis"] = basis_name(basis);
    j["strong_ratio"] = std::isinf(strong_ratio) ? nlohmann::ordered_json("inf")
                                                 : nlohmann::ordered_json(strong_ratio);
    j["weak_ratio"] = std::isinf(weak_ratio) ? nlohmann::ordered_json("inf")
                                             : nlohmann::ordered_json(weak_ratio);
    j["lambda"] = lambda;
    j["trials"] = trials;
    return j;
  }
};

namespace detail {

struct RatioOutcome {
  double strong = 0.0;
  double weak = 0.0;
  double lambda = 0.0;
  bool usable = false;
};

// Evaluate one candidate f: tucked field M_*(f/tuck), strong Rayleigh ratio
// against ||f||^p_{L^p(sigma)}, and the weak ratio maximized over a dyadic
// lambda grid spanning the positive field range. The tuck weight defaults to
// sigma (the standard tucked inequality); untucked one-weight forms pass
// tuck = 1 and the geometric p = 1 form passes sigma = 1, tuck = v.
inline RatioOutcome rayleigh_ratio(MeanKind kind, const Basis& basis, const GridFunction& u,
                                   const GridFunction& sigma, double p, const GridFunction& f,
                                   const GridFunction* tuck_weight = nullptr) {
  const GridFunction& tuck = tuck_weight ? *tuck_weight : sigma;
  const Domain& d = basis.domain;
  long double den = 0.0L;
  GridFunction g(d);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double fv = f.values[i];
    const double tv = tuck.values[i];
    den += std::pow(static_cast<long double>(fv), static_cast<long double>(p)) * sigma.values[i];
    // f / tuck, with 0/0 := 0 (f should vanish off the support of the tuck).
    g.values[i] = fv > 0.0 ? (tv > 0.0 ? fv / tv : kInf) : 0.0;
  }
  if (!(den > 0.0L)) return {};  // ||f||_{L^p(sigma)} = 0: skipped
  const MaximalField field = maximal_auto(kind, basis, g);

  long double num = 0.0L;
  long double inf_mass = 0.0L;
  double max_finite = 0.0;
  double min_positive = kInf;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double v = field.values[i];
    const double uw = u.values[i];
    if (std::isinf(v)) {
      inf_mass += uw;
      continue;
    }
    if (uw > 0.0)
      num += std::pow(static_cast<long double>(v), static_cast<long double>(p)) * uw;
    if (v > 0.0) {
      max_finite = std::max(max_finite, v);
      min_positive = std::min(min_positive, v);
    }
  }
  RatioOutcome out;
  out.usable = true;
  if (inf_mass > 0.0L) {
    out.strong = kInf;
    out.weak = kInf;
    out.lambda = max_finite > 0.0 ? max_finite : 1.0;
    return out;
  }
  out.strong = static_cast<double>(num / den);

  if (max_finite > 0.0) {
    // Powers of 2 spanning [min positive value, max value]; u({field > lambda})
    // evaluated from a sorted copy with suffix u-masses.
    std::vector<std::pair<double, double>> cells;
    cells.reserve(field.values.size());
    for (std::size_t i = 0; i < field.values.size(); ++i)
      if (field.values[i] > 0.0 && u.values[i] > 0.0)
        cells.emplace_back(field.values[i], u.values[i]);
    std::sort(cells.begin(), cells.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<long double> suffix(cells.size() + 1, 0.0L);
    for (std::size_t i = cells.size(); i-- > 0;) suffix[i] = suffix[i + 1] + cells[i].second;
    const int klo = static_cast<int>(std::floor(std::log2(min_positive))) - 1;
    const int khi = static_cast<int>(std::ceil(std::log2(max_finite)));
    for (int k = klo; k <= khi; ++k) {
      const double lam = std::ldexp(1.0, k);
      const auto it = std::upper_bound(cells.begin(), cells.end(), lam,
                                       [](double x, const auto& c) { return x < c.first; });
      const long double mass = suffix[static_cast<std::size_t>(it - cells.begin())];
      if (mass <= 0.0L) continue;
      const double w =
          static_cast<double>(std::pow(static_cast<long double>(lam), static_cast<long double>(p)) *
                              mass / den);
      if (w > out.weak) {
        out.weak = w;
        out.lambda = lam;
      }
    }
  }
  return out;
}

}  // namespace detail

// Empirical lower bound on the tucked two-weight norm of M_* : candidates are
// the constant function, indicators of sampled unions, tuck-tilted and
// floored variants, random log-normal fields, and a greedy cellwise
// multiplicative ascent from the best candidate (x2 / x0.5 sweeps).
// Deterministic under (seed, trials) and independent of the thread count.
// tuck_weight defaults to sigma; see rayleigh_ratio for the two other forms.
// extra_candidates lets callers force specific fields (e.g. indicators of
// witness sets) into the family.
inline NormEstimate estimate_operator_norm(MeanKind kind, const GridFunction& u,
                                           const GridFunction& sigma, const Basis& basis, double p,
                                           std::int64_t trials = 200, std::uint64_t seed = 1,
                                           const GridFunction* tuck_weight = nullptr,
                                           const std::vector<GridFunction>* extra_candidates =
                                               nullptr) {
  require_same_domain(u.domain, basis.domain);
  require_same_domain(sigma.domain, basis.domain);
  require_weight(u, "u");
  require_weight(sigma, "sigma");
  if (tuck_weight) {
    require_same_domain(tuck_weight->domain, basis.domain);
    require_weight(*tuck_weight, "tuck");
  }
  validate_basis(basis);
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("p must be positive");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  const Domain& d = basis.domain;
  const std::int64_t n = d.cell_count();
  const GridFunction& tuck = tuck_weight ? *tuck_weight : sigma;

  const std::int64_t extras =
      extra_candidates ? static_cast<std::int64_t>(extra_candidates->size()) : 0;
  const std::int64_t slot_count = trials + extras;
  struct Slot {
    detail::RatioOutcome out;
    GridFunction f;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(slot_count));

  auto union_cells = [&](SplitMix64& rng) {
    const SetUnion un = random_union(basis, 1 + rng.next_below(4), rng);
    return un.cells;
  };

  parallel_for(slot_count, [&](std::int64_t t) {
    GridFunction f(d, 1.0);
    if (t >= trials) {
      f = (*extra_candidates)[static_cast<std::size_t>(t - trials)];
      require_same_domain(f.domain, d);
    } else if (t > 0) {
      SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(t));
      switch (t % 5) {
        case 1: {  // indicator of a sampled union
          const CellSet cs = union_cells(rng);
          for (std::int64_t i = 0; i < n; ++i)
            f.values[static_cast<std::size_t>(i)] = cs.mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
          break;
        }
        case 2: {  // tuck-tilted indicator: f = tuck on F (so f/tuck = 1_F)
          const CellSet cs = union_cells(rng);
          for (std::int64_t i = 0; i < n; ++i)
            f.values[static_cast<std::size_t>(i)] =
                cs.mask[static_cast<std::size_t>(i)] ? tuck.values[static_cast<std::size_t>(i)]
                                                     : 0.0;
          break;
        }
        case 3: {  // floored indicator: escapes all-or-nothing supports
          const CellSet cs = union_cells(rng);
          const double tau = std::ldexp(1.0, -1 - static_cast<int>(rng.next_below(40)));
          for (std::int64_t i = 0; i < n; ++i)
            f.values[static_cast<std::size_t>(i)] = cs.mask[static_cast<std::size_t>(i)] ? 1.0 : tau;
          break;
        }
        case 4: {  // tuck-tilted floored indicator (f/tuck is a floored indicator)
          const CellSet cs = union_cells(rng);
          const double tau = std::ldexp(1.0, -1 - static_cast<int>(rng.next_below(40)));
          for (std::int64_t i = 0; i < n; ++i)
            f.values[static_cast<std::size_t>(i)] =
                tuck.values[static_cast<std::size_t>(i)] *
                (cs.mask[static_cast<std::size_t>(i)] ? 1.0 : tau);
          break;
        }
        default: {  // log-normal field
          const double s = 0.25 * static_cast<double>(1 + rng.next_below(8));
          for (std::int64_t i = 0; i < n; ++i)
            f.values[static_cast<std::size_t>(i)] = std::exp(s * rng.next_normal());
          break;
        }
      }
    }
    Slot& slot = slots[static_cast<std::size_t>(t)];
    slot.out = detail::rayleigh_ratio(kind, basis, u, sigma, p, f, tuck_weight);
    if (slot.out.usable) slot.f = std::move(f);
  });

  NormEstimate est;
  est.op = kind.name();
  est.p = p;
  est.basis = basis.kind;
  est.trials = slot_count;
  std::int64_t best_strong = -1, best_weak = -1;
  for (std::int64_t t = 0; t < slot_count; ++t) {
    const Slot& s = slots[static_cast<std::size_t>(t)];
    if (!s.out.usable) continue;
    if (best_strong < 0 || s.out.strong > est.strong_ratio) {
      est.strong_ratio = s.out.strong;
      best_strong = t;
    }
    if (best_weak < 0 || s.out.weak > est.weak_ratio) {
      est.weak_ratio = s.out.weak;
      est.lambda = s.out.lambda;
      best_weak = t;
    }
  }
  if (best_strong < 0) return est;  // every candidate was sigma-null
  GridFunction best_f = slots[static_cast<std::size_t>(best_strong)].f;
  est.weak_witness = slots[static_cast<std::size_t>(best_weak)].f;

  // Greedy multiplicative ascent on the strong witness. The full field is
  // recomputed per probe, so the sweep is gated to families where that is
  // cheap; the candidate phase above is never gated.
  const bool greedy = basis.kind == BasisKind::Dyadic || n <= 256;
  if (greedy && !std::isinf(est.strong_ratio)) {
    const int sweeps = 3;
    for (int sweep = 0; sweep < sweeps; ++sweep)
      for (std::int64_t i = 0; i < n; ++i)
        for (const double factor : {2.0, 0.5}) {
          const double old = best_f.values[static_cast<std::size_t>(i)];
          if (old <= 0.0) continue;
          best_f.values[static_cast<std::size_t>(i)] = old * factor;
          const auto probe = detail::rayleigh_ratio(kind, basis, u, sigma, p, best_f, tuck_weight);
          if (probe.usable && probe.strong > est.strong_ratio) {
            est.strong_ratio = probe.strong;
            if (probe.weak > est.weak_ratio) {
              est.weak_ratio = probe.weak;
              est.lambda = probe.lambda;
              est.weak_witness = best_f;
            }
          } else {
            best_f.values[static_cast<std::size_t>(i)] = old;
          }
        }
  }
  est.strong_witness = std::move(best_f);
  return est;
}

// ---- sparse subfamily selection ---------------------------------------------------

struct SelectionResult {
  double alpha = 0.5;
  std::vector<std::int64_t> selected;  // indices into the input list, ascending
  std::vector<double> overlap;  // per selected set: |overlap with earlier| / |set|

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["alpha"] = alpha;
    j["selected"] = selected;
    j["overlap"] = overlap;
    return j;
  }
};

// Greedy scan in the given order: keep a set iff it meets the union of the
// previously kept sets in at most alpha of its own measure. The recorded
// overlap fractions certify that property for every selected set.
inline SelectionResult select_sparse_subfamily(const Domain& domain, const std::vector<Box>& sets,
                                               double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  domain.validate();
  SelectionResult res;
  res.alpha = alpha;
  CellSet taken(domain);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const Box& b = sets[i];
    if (!b.inside(domain)) throw std::invalid_argument("set leaves the domain");
    std::int64_t inter = 0;
    for_each_cell(b, [&](const Index3& c) {
      if (taken.mask[static_cast<std::size_t>(domain.flat_index(c))]) ++inter;
    });
    const double frac = static_cast<double>(inter) / static_cast<double>(b.cell_count());
    if (frac <= alpha) {
      res.selected.push_back(static_cast<std::int64_t>(i));
      res.overlap.push_back(frac);
      taken.insert(b);
    }
  }
  return res;
}

}  // namespace maxop
