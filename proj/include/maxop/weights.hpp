#pragma once

// Scalar weight-condition constants: one-weight A_p / A_infty, the doubling
// constant, a condition-A estimator, and the two-weight conditions (joint
// harmonic, harmonic bump r<1, arithmetic bump r>1, two-weight A_infty).
//
// Every constant is a supremum of a per-set functional built from O(1) box
// means; enumeration is chunked across threads and merged in chunk order, so
// the reported value and witness never depend on the thread count. Ties pick
// the canonically smallest witness (size then lower corner).
//
// Extended-real convention, applied uniformly and noted per operation:
// inside constants 0 * inf := inf. A degenerate set (for example w vanishing
// on it) flags the weight as failing the condition rather than hiding it.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
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

struct ConstantReport {
  std::string name;
  double value = 0.0;  // may be +inf
  BasisKind basis = BasisKind::Dyadic;
  int dim = 1;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::optional<Box> witness;           // single attaining set, when applicable
  std::optional<SetUnion> witness_union;  // attaining union (testing-style suprema)
  std::vector<std::int64_t> witness_cells;  // attaining measurable set (condition A)

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["value"] = std::isinf(value) ? nlohmann::ordered_json("inf")
                                   : nlohmann::ordered_json(value);
    if (witness) j["witness"] = box_to_json(*witness, dim);
    else if (!witness_cells.empty()) j["witness"] = {{"cells", witness_cells}};
    else if (witness_union) j["witness"] = union_to_json(*witness_union, dim);
    else j["witness"] = nullptr;
    j["basis"] = basis_name(basis);
    j["params"] = params;
    return j;
  }
};

namespace detail {

// sup over all basis sets of term(box); term returns nullopt to skip a set
// (sigma-null). Chunked deterministic reduction; ties toward the canonically
// smallest box, independent of enumeration or chunk order.
template <typename TermFn>
ConstantReport sup_over_sets(const Basis& basis, TermFn&& term) {
  validate_basis(basis);
  ConstantReport rep;
  rep.basis = basis.kind;
  rep.dim = basis.domain.dim;

  struct Slot {
    double value = 0.0;
    Box box;
    bool has = false;
  };
  auto consider = [](Slot& s, double v, const Box& b) {
    if (!s.has || v > s.value) {
      s.value = v;
      s.box = b;
      s.has = true;
    } else if (v == s.value && b < s.box) {
      s.box = b;
    }
  };

  const std::int64_t total = count_sets(basis);
  const int threads = thread_count();
  const std::int64_t chunks =
      (threads > 1 && total >= 8192) ? std::min<std::int64_t>(total, std::int64_t{threads} * 8)
                                     : 1;
  std::vector<Slot> slots(static_cast<std::size_t>(chunks));
  parallel_for(chunks, [&](std::int64_t chunk) {
    const std::int64_t lo = total * chunk / chunks;
    const std::int64_t hi = total * (chunk + 1) / chunks;
    Slot s;
    for (std::int64_t i = lo; i < hi; ++i) {
      const Box b = nth_set(basis, i);
      const auto v = term(b);
      if (v) consider(s, *v, b);
    }
    slots[static_cast<std::size_t>(chunk)] = s;
  });
  Slot best;
  for (const Slot& s : slots)
    if (s.has) consider(best, s.value, s.box);
  if (best.has) {
    rep.value = best.value;
    rep.witness = best.box;
  }
  return rep;
}

inline GridFunction transformed(const GridFunction& w, double exponent) {
  GridFunction out(w.domain);
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double v = w.values[i];
    out.values[i] = v > 0.0 ? std::pow(v, exponent) : (exponent < 0.0 ? kInf : 0.0);
  }
  return out;
}

}  // namespace detail

// [w]_{A_p} = sup over basis sets of (avg w) * (avg w^{-1/(p-1)})^{p-1}, p > 1.
// Degenerate sets (w vanishing, so the dual average is +inf) report +inf via
// the 0 * inf := inf convention.
inline ConstantReport ap_constant(const GridFunction& w, const Basis& basis, double p) {
  require_same_domain(w.domain, basis.domain);
  require_weight(w, "w");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("A_p requires p > 1");
  const GridFunction dual = detail::transformed(w, -1.0 / (p - 1.0));
  MeanTable mw(MeanKind::arithmetic(), w, nullptr);
  MeanTable md(MeanKind::arithmetic(), dual, nullptr);
  ConstantReport rep = detail::sup_over_sets(basis, [&](const Box& b) -> std::optional<double> {
    const double aw = *mw.box_mean(b);
    const double ad = *md.box_mean(b);
    return degenerate_product(aw, std::pow(ad, p - 1.0));
  });
  rep.name = "ap";
  rep.params["p"] = p;
  return rep;
}

// [w]_{A_infty} = sup of (avg w) * exp(-avg log w), the per-set AM/GM ratio.
inline ConstantReport ainfty_constant(const GridFunction& w, const Basis& basis) {
  require_same_domain(w.domain, basis.domain);
  require_weight(w, "w");
  MeanTable am(MeanKind::arithmetic(), w, nullptr);
  MeanTable gm(MeanKind::geometric(), w, nullptr);
  ConstantReport rep = detail::sup_over_sets(basis, [&](const Box& b) -> std::optional<double> {
    return degenerate_product(*am.box_mean(b), reciprocal(*gm.box_mean(b)));
  });
  rep.name = "ainfty";
  return rep;
}

// Doubling constant d(mu) = sup mu(2Q)/mu(Q) over lattice cubes Q whose
// concentric double fits in the domain. Exact concentric doubling needs an
// even side s: 2Q has lower corner shifted by s/2 and side 2s. Cubes whose
// double leaves the domain are skipped. max_scale bounds the side of Q
// (max_scale <= 0 means unbounded).
inline ConstantReport doubling_constant(const GridFunction& mu, std::int64_t max_scale = 0) {
  require_weight(mu, "mu");
  const Domain& d = mu.domain;
  detail::SumTable<long double> table(d, [&](std::int64_t i) {
    return static_cast<long double>(mu.values[static_cast<std::size_t>(i)]);
  });
  std::int64_t min_shape = d.shape[0];
  for (int a = 1; a < d.dim; ++a) min_shape = std::min(min_shape, d.shape[a]);
  ConstantReport rep;
  rep.basis = BasisKind::Cubes;
  rep.dim = d.dim;
  rep.name = "doubling";
  rep.params["max_scale"] = max_scale;
  bool has = false;
  for (std::int64_t s = 2; 2 * s <= min_shape; s += 2) {
    if (max_scale > 0 && s > max_scale) break;
    Index3 upper{1, 1, 1};
    for (int a = 0; a < d.dim; ++a) upper[a] = d.shape[a] - 3 * s / 2;
    Box q, dq;
    for (int a = 0; a < 3; ++a) {
      q.size[a] = a < d.dim ? s : 1;
      dq.size[a] = a < d.dim ? 2 * s : 1;
    }
    Index3 l{0, 0, 0};
    for (l[0] = d.dim > 0 ? s / 2 : 0; l[0] <= (d.dim > 0 ? upper[0] : 0); ++l[0])
      for (l[1] = d.dim > 1 ? s / 2 : 0; l[1] <= (d.dim > 1 ? upper[1] : 0); ++l[1])
        for (l[2] = d.dim > 2 ? s / 2 : 0; l[2] <= (d.dim > 2 ? upper[2] : 0); ++l[2]) {
          q.lower = l;
          for (int a = 0; a < d.dim; ++a) dq.lower[a] = l[a] - s / 2;
          const double wq = static_cast<double>(table.box_sum(q));
          const double w2q = static_cast<double>(table.box_sum(dq));
          const double v = wq > 0.0 ? w2q / wq : kInf;  // 0-mass Q: degenerate
          if (!has || v > rep.value || (v == rep.value && q < *rep.witness)) {
            if (!has || v > rep.value) {
              rep.value = v;
              rep.witness = q;
              has = true;
            } else if (q < *rep.witness) {
              rep.witness = q;
            }
          }
        }
  }
  return rep;
}

// Joint harmonic two-weight constant: sup of (avg u) / (avg sigma)^(p+1).
// +inf whenever some set has avg sigma = 0 (0 * inf := inf when avg u = 0 too).
inline ConstantReport joint_harmonic_constant(const GridFunction& u, const GridFunction& sigma,
                                              const Basis& basis, double p) {
  require_same_domain(u.domain, basis.domain);
  require_same_domain(sigma.domain, basis.domain);
  require_weight(u, "u");
  require_weight(sigma, "sigma");
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("p must be positive");
  MeanTable mu(MeanKind::arithmetic(), u, nullptr);
  MeanTable ms(MeanKind::arithmetic(), sigma, nullptr);
  ConstantReport rep = detail::sup_over_sets(basis, [&](const Box& b) -> std::optional<double> {
    const double au = *mu.box_mean(b);
    const double as = *ms.box_mean(b);
    return degenerate_product(au, as > 0.0 ? std::pow(as, -(p + 1.0)) : kInf);
  });
  rep.name = "joint-harmonic";
  rep.params["p"] = p;
  return rep;
}

// Harmonic bump constant (0 < r < 1): sup of (avg u) / (avg sigma^r)^((p+1)/r).
// Jensen gives (avg sigma^r)^(1/r) <= avg sigma, so this dominates the joint
// harmonic constant.
inline ConstantReport bump_harmonic_constant(const GridFunction& u, const GridFunction& sigma,
                                             const Basis& basis, double p, double r) {
  require_same_domain(u.domain, basis.domain);
  require_same_domain(sigma.domain, basis.domain);
  require_weight(u, "u");
  require_weight(sigma, "sigma");
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("p must be positive");
  if (!(r > 0.0) || !(r < 1.0)) throw std::invalid_argument("harmonic bump requires 0 < r < 1");
  MeanTable mu(MeanKind::arithmetic(), u, nullptr);
  MeanTable mr(MeanKind::power(r), sigma, nullptr);  // (avg sigma^r)^(1/r)
  ConstantReport rep = detail::sup_over_sets(basis, [&](const Box& b) -> std::optional<double> {
    const double au = *mu.box_mean(b);
    const double m = *mr.box_mean(b);
    return degenerate_product(au, m > 0.0 ? std::pow(m, -(p + 1.0)) : kInf);
  });
  rep.name = "bump-harmonic";
  rep.params["p"] = p;
  rep.params["r"] = r;
  return rep;
}

// Arithmetic bump constant (r > 1): sup of (avg u)^(1/p) * (avg sigma^r)^(1/(r p')),
// p' = p/(p-1).
inline ConstantReport bump_arithmetic_constant(const GridFunction& u, const GridFunction& sigma,
                                               const Basis& basis, double p, double r) {
  require_same_domain(u.domain, basis.domain);
  require_same_domain(sigma.domain, basis.domain);
  require_weight(u, "u");
  require_weight(sigma, "sigma");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("arithmetic bump requires p > 1");
  if (!(r > 1.0) || !std::isfinite(r)) throw std::invalid_argument("arithmetic bump requires r > 1");
  const double pprime = p / (p - 1.0);
  MeanTable mu(MeanKind::arithmetic(), u, nullptr);
  MeanTable mr(MeanKind::power(r), sigma, nullptr);
  ConstantReport rep = detail::sup_over_sets(basis, [&](const Box& b) -> std::optional<double> {
    const double au = *mu.box_mean(b);
    const double m = *mr.box_mean(b);
    return std::pow(au, 1.0 / p) * std::pow(m, 1.0 / pprime);
  });
  rep.name = "bump-arithmetic";
  rep.params["p"] = p;
  rep.params["r"] = r;
  return rep;
}

// Two-weight A_infty constant: sup of (avg u) * exp(-avg log v); +inf when v
// vanishes on a set (conservative when avg u = 0 as well).
inline ConstantReport twoweight_ainfty_constant(const GridFunction& u, const GridFunction& v,
                                                const Basis& basis) {
  require_same_domain(u.domain, basis.domain);
  require_same_domain(v.domain, basis.domain);
  require_weight(u, "u");
  require_weight(v, "v");
  MeanTable am(MeanKind::arithmetic(), u, nullptr);
  MeanTable gm(MeanKind::geometric(), v, nullptr);
  ConstantReport rep = detail::sup_over_sets(basis, [&](const Box& b) -> std::optional<double> {
    return degenerate_product(*am.box_mean(b), reciprocal(*gm.box_mean(b)));
  });
  rep.name = "twoweight-ainfty";
  return rep;
}

// ---- condition A ---------------------------------------------------------------

enum class ConditionAMode { Sampled, Exhaustive };

namespace detail {

struct ConditionARatio {
  double value;
  bool usable;
};

// w(superlevel)/w(E) with the quantifier-forced reading of null sets: a
// w-null E whose superlevel has positive w-measure breaks the condition
// (+inf); if the superlevel is w-null too, the condition holds vacuously and
// the set is skipped.
inline ConditionARatio condition_a_ratio(const GridFunction& w, const Basis& basis, double alpha,
                                         const CellSet& e) {
  GridFunction ind(w.domain);
  for (std::size_t i = 0; i < ind.values.size(); ++i)
    ind.values[i] = e.mask[i] ? 1.0 : 0.0;
  const MaximalField field = maximal_auto(MeanKind::arithmetic(), basis, ind);
  long double we = 0.0L, ws = 0.0L;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    if (e.mask[i]) we += w.values[i];
    if (field.values[i] > alpha) ws += w.values[i];
  }
  if (we > 0.0L) return {static_cast<double>(ws / we), true};
  if (ws > 0.0L) return {kInf, true};
  return {0.0, false};
}

}  // namespace detail

// Estimate c(alpha) = sup_E w({M 1_E > alpha}) / w(E) over measurable sets E.
// Sampled mode draws single basis sets, small unions, and Bernoulli cell sets
// from per-trial substreams (a lower bound for the sup); exhaustive mode runs
// all 2^N cell subsets and is gated to N <= 16 cells.
inline ConstantReport condition_a_estimate(const GridFunction& w, const Basis& basis, double alpha,
                                           std::int64_t trials = 200, std::uint64_t seed = 1,
                                           ConditionAMode mode = ConditionAMode::Sampled) {
  require_same_domain(w.domain, basis.domain);
  require_weight(w, "w");
  validate_basis(basis);
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("condition A requires 0 < alpha < 1");
  const Domain& d = w.domain;
  ConstantReport rep;
  rep.name = "condition-a";
  rep.basis = basis.kind;
  rep.dim = d.dim;
  rep.params["alpha"] = alpha;
  rep.params["mode"] = mode == ConditionAMode::Exhaustive ? "exhaustive" : "sampled";

  if (mode == ConditionAMode::Exhaustive) {
    const std::int64_t n = d.cell_count();
    if (n > 16) throw std::invalid_argument("exhaustive condition A is gated to <= 16 cells");
    // Per-set cell masks; E-superlevel = union of sets whose E-fraction
    // exceeds alpha (singleton sets make the superlevel contain E itself).
    std::vector<std::uint32_t> set_mask;
    std::vector<double> set_bar;  // alpha * |S|
    for_each_set(basis, [&](const Box& b) {
      std::uint32_t m = 0;
      for_each_cell(b, [&](const Index3& c) {
        m |= std::uint32_t{1} << d.flat_index(c);
      });
      set_mask.push_back(m);
      set_bar.push_back(alpha * static_cast<double>(b.cell_count()));
    });
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;  // n <= 16
    std::vector<double> wsum(std::size_t{1} << n, 0.0);
    for (std::uint32_t m = 1; m <= full; ++m) {
      const int bit = std::countr_zero(m);
      wsum[m] = wsum[m & (m - 1)] + w.values[static_cast<std::size_t>(bit)];
    }
    bool has = false;
    std::uint32_t best_mask = 0;
    for (std::uint32_t e = 1; e <= full; ++e) {
      std::uint32_t sup = 0;
      for (std::size_t s = 0; s < set_mask.size(); ++s)
        if (static_cast<double>(std::popcount(set_mask[s] & e)) > set_bar[s]) sup |= set_mask[s];
      const double we = wsum[e];
      double v;
      if (we > 0.0) v = wsum[sup] / we;
      else if (wsum[sup] > 0.0) v = kInf;
      else continue;
      if (!has || v > rep.value) {
        rep.value = v;
        best_mask = e;
        has = true;
      }
    }
    if (has)
      for (std::int64_t i = 0; i < n; ++i)
        if (best_mask & (std::uint32_t{1} << i)) rep.witness_cells.push_back(i);
    rep.params["subsets"] = static_cast<std::int64_t>(full);
    return rep;
  }

  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  rep.params["trials"] = trials;
  rep.params["seed"] = seed;
  const std::int64_t total = count_sets(basis);
  struct Slot {
    double value = 0.0;
    CellSet cells;
    bool has = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(trials));
  parallel_for(trials, [&](std::int64_t t) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(t));
    CellSet e(d);
    switch (t % 3) {
      case 0:  // single basis set
        e.insert(nth_set(basis, rng.next_below(total)));
        break;
      case 1: {  // small union of basis sets
        const SetUnion un = random_union(basis, 1 + rng.next_below(4), rng);
        for (const Box& b : un.members) e.insert(b);
        break;
      }
      default: {  // Bernoulli cell subset, density in [0.02, 0.51]
        const double density = (1.0 + static_cast<double>(rng.next_below(50))) / 100.0;
        for (std::size_t i = 0; i < e.mask.size(); ++i)
          if (rng.next_double() < density) e.mask[i] = 1;
        break;
      }
    }
    if (e.count() == 0) return;
    const auto r = detail::condition_a_ratio(w, basis, alpha, e);
    if (r.usable) slots[static_cast<std::size_t>(t)] = {r.value, std::move(e), true};
  });
  bool has = false;
  for (const Slot& s : slots)
    if (s.has && (!has || s.value > rep.value)) {  // ties keep the earliest trial
      rep.value = s.value;
      rep.witness_cells.clear();
      for (std::size_t i = 0; i < s.cells.mask.size(); ++i)
        if (s.cells.mask[i]) rep.witness_cells.push_back(static_cast<std::int64_t>(i));
      has = true;
    }
  return rep;
}

}  // namespace maxop
