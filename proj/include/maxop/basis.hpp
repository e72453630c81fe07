#pragma once

// Families of averaging sets over a Domain. Three kinds:
//   Dyadic      - aligned cubes of side 2^k (pairwise nested or disjoint)
//   Cubes       - all axis-parallel lattice cubes fully inside the domain
//   Rectangles  - all axis-parallel boxes (dim 2 primarily; dim 3 sits behind
//                 a size guard because the enumeration is Theta(prod N_a^2))
// Sets that would straddle the boundary are not clipped; they are absent.
// Every family is enumerated in a fixed order and suprema break ties toward
// the canonically smallest box, so witnesses are deterministic.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "rng.hpp"

#include <json.hpp>

namespace maxop {

enum class BasisKind { Dyadic, Cubes, Rectangles };

inline const char* basis_name(BasisKind k) {
  switch (k) {
    case BasisKind::Dyadic: return "dyadic";
    case BasisKind::Cubes: return "cubes";
    case BasisKind::Rectangles: return "rectangles";
  }
  return "?";
}

inline BasisKind basis_from_name(const std::string& s) {
  if (s == "dyadic") return BasisKind::Dyadic;
  if (s == "cubes") return BasisKind::Cubes;
  if (s == "rects" || s == "rectangles") return BasisKind::Rectangles;
  throw std::invalid_argument("unknown basis '" + s + "'");
}

struct Basis {
  BasisKind kind = BasisKind::Dyadic;
  Domain domain;
};

namespace detail {

inline int levels(std::int64_t n) {  // log2 for powers of two
  int k = 0;
  while ((std::int64_t{1} << k) < n) ++k;
  return k;
}

inline int dyadic_max_level(const Basis& b) {
  int kmax = 62;
  for (int a = 0; a < b.domain.dim; ++a) kmax = std::min(kmax, levels(b.domain.shape[a]));
  return kmax;
}

inline std::int64_t cube_max_side(const Basis& b) {
  std::int64_t s = b.domain.shape[0];
  for (int a = 1; a < b.domain.dim; ++a) s = std::min(s, b.domain.shape[a]);
  return s;
}

inline std::int64_t intervals_per_axis(std::int64_t n) { return n * (n + 1) / 2; }

}  // namespace detail

inline std::int64_t count_sets(const Basis& b) {
  const Domain& d = b.domain;
  switch (b.kind) {
    case BasisKind::Dyadic: {
      std::int64_t total = 0;
      for (int k = 0; k <= detail::dyadic_max_level(b); ++k) {
        std::int64_t per_level = 1;
        for (int a = 0; a < d.dim; ++a) per_level *= d.shape[a] >> k;
        total += per_level;
      }
      return total;
    }
    case BasisKind::Cubes: {
      std::int64_t total = 0;
      for (std::int64_t s = 1; s <= detail::cube_max_side(b); ++s) {
        std::int64_t per_size = 1;
        for (int a = 0; a < d.dim; ++a) per_size *= d.shape[a] - s + 1;
        total += per_size;
      }
      return total;
    }
    case BasisKind::Rectangles: {
      std::int64_t total = 1;
      for (int a = 0; a < d.dim; ++a) total *= detail::intervals_per_axis(d.shape[a]);
      return total;
    }
  }
  return 0;
}

inline void validate_basis(const Basis& b) {
  b.domain.validate();
  if (b.kind == BasisKind::Rectangles && b.domain.dim == 3) {
    constexpr std::int64_t kGuard = std::int64_t{1} << 26;
    if (count_sets(b) > kGuard)
      throw std::invalid_argument(
          "rectangle basis in dim 3 exceeds the enumeration guard; use a smaller domain");
  }
}

// Visit every set of the family, fixed order.
template <class Fn>
void for_each_set(const Basis& b, Fn&& fn) {
  validate_basis(b);
  const Domain& d = b.domain;
  Box box;
  switch (b.kind) {
    case BasisKind::Dyadic: {
      for (int k = 0; k <= detail::dyadic_max_level(b); ++k) {
        const std::int64_t side = std::int64_t{1} << k;
        for (int a = 0; a < d.dim; ++a) box.size[a] = side;
        Index3 steps{1, 1, 1};
        for (int a = 0; a < d.dim; ++a) steps[a] = d.shape[a] >> k;
        for (std::int64_t i0 = 0; i0 < steps[0]; ++i0)
          for (std::int64_t i1 = 0; i1 < steps[1]; ++i1)
            for (std::int64_t i2 = 0; i2 < steps[2]; ++i2) {
              box.lower = {i0 * side, d.dim > 1 ? i1 * side : 0, d.dim > 2 ? i2 * side : 0};
              fn(box);
            }
      }
      break;
    }
    case BasisKind::Cubes: {
      for (std::int64_t s = 1; s <= detail::cube_max_side(b); ++s) {
        for (int a = 0; a < d.dim; ++a) box.size[a] = s;
        Index3 steps{1, 1, 1};
        for (int a = 0; a < d.dim; ++a) steps[a] = d.shape[a] - s + 1;
        for (std::int64_t i0 = 0; i0 < steps[0]; ++i0)
          for (std::int64_t i1 = 0; i1 < steps[1]; ++i1)
            for (std::int64_t i2 = 0; i2 < steps[2]; ++i2) {
              box.lower = {i0, i1, i2};
              fn(box);
            }
      }
      break;
    }
    case BasisKind::Rectangles: {
      // Mixed radix over per-axis intervals, each axis ordered (size, lower).
      std::array<std::vector<std::pair<std::int64_t, std::int64_t>>, 3> axis;  // (size, lower)
      for (int a = 0; a < 3; ++a) {
        if (a >= d.dim) {
          axis[a] = {{1, 0}};
          continue;
        }
        for (std::int64_t s = 1; s <= d.shape[a]; ++s)
          for (std::int64_t l = 0; l + s <= d.shape[a]; ++l) axis[a].push_back({s, l});
      }
      for (const auto& [s0, l0] : axis[0])
        for (const auto& [s1, l1] : axis[1])
          for (const auto& [s2, l2] : axis[2]) {
            box.size = {s0, s1, s2};
            box.lower = {l0, l1, l2};
            fn(box);
          }
      break;
    }
  }
}

inline std::vector<Box> enumerate_all(const Basis& b) {
  std::vector<Box> out;
  out.reserve(static_cast<std::size_t>(std::min<std::int64_t>(count_sets(b), 1 << 22)));
  for_each_set(b, [&](const Box& box) { out.push_back(box); });
  return out;
}

// Set number i in enumeration order, without materializing the family.
inline Box nth_set(const Basis& b, std::int64_t i) {
  const Domain& d = b.domain;
  if (i < 0 || i >= count_sets(b)) throw std::out_of_range("set index out of range");
  Box box;
  switch (b.kind) {
    case BasisKind::Dyadic: {
      for (int k = 0; k <= detail::dyadic_max_level(b); ++k) {
        const std::int64_t side = std::int64_t{1} << k;
        Index3 steps{1, 1, 1};
        std::int64_t per_level = 1;
        for (int a = 0; a < d.dim; ++a) {
          steps[a] = d.shape[a] >> k;
          per_level *= steps[a];
        }
        if (i < per_level) {
          Index3 pos = {i / (steps[1] * steps[2]), (i / steps[2]) % steps[1], i % steps[2]};
          for (int a = 0; a < 3; ++a) {
            box.size[a] = a < d.dim ? side : 1;
            box.lower[a] = a < d.dim ? pos[a] * side : 0;
          }
          return box;
        }
        i -= per_level;
      }
      break;
    }
    case BasisKind::Cubes: {
      for (std::int64_t s = 1; s <= detail::cube_max_side(b); ++s) {
        Index3 steps{1, 1, 1};
        std::int64_t per_size = 1;
        for (int a = 0; a < d.dim; ++a) {
          steps[a] = d.shape[a] - s + 1;
          per_size *= steps[a];
        }
        if (i < per_size) {
          Index3 pos = {i / (steps[1] * steps[2]), (i / steps[2]) % steps[1], i % steps[2]};
          for (int a = 0; a < 3; ++a) {
            box.size[a] = a < d.dim ? s : 1;
            box.lower[a] = a < d.dim ? pos[a] : 0;
          }
          return box;
        }
        i -= per_size;
      }
      break;
    }
    case BasisKind::Rectangles: {
      Index3 radix{1, 1, 1};
      for (int a = 0; a < d.dim; ++a) radix[a] = detail::intervals_per_axis(d.shape[a]);
      Index3 digit = {i / (radix[1] * radix[2]), (i / radix[2]) % radix[1], i % radix[2]};
      for (int a = 0; a < 3; ++a) {
        if (a >= d.dim) {
          box.size[a] = 1;
          box.lower[a] = 0;
          continue;
        }
        std::int64_t rem = digit[a];
        for (std::int64_t s = 1; s <= d.shape[a]; ++s) {
          const std::int64_t per = d.shape[a] - s + 1;
          if (rem < per) {
            box.size[a] = s;
            box.lower[a] = rem;
            break;
          }
          rem -= per;
        }
      }
      return box;
    }
  }
  throw std::out_of_range("set index out of range");
}

// All family members containing the given cell.
template <class Fn>
void for_each_set_containing(const Basis& b, const Index3& cell, Fn&& fn) {
  validate_basis(b);
  const Domain& d = b.domain;
  for (int a = 0; a < d.dim; ++a)
    if (cell[a] < 0 || cell[a] >= d.shape[a]) throw std::invalid_argument("cell outside domain");
  Box box;
  switch (b.kind) {
    case BasisKind::Dyadic: {
      for (int k = 0; k <= detail::dyadic_max_level(b); ++k) {
        const std::int64_t side = std::int64_t{1} << k;
        for (int a = 0; a < 3; ++a) {
          box.size[a] = a < d.dim ? side : 1;
          box.lower[a] = a < d.dim ? (cell[a] >> k) << k : 0;
        }
        fn(box);
      }
      break;
    }
    case BasisKind::Cubes: {
      for (std::int64_t s = 1; s <= detail::cube_max_side(b); ++s) {
        for (int a = 0; a < d.dim; ++a) box.size[a] = s;
        Index3 lo, hi;
        for (int a = 0; a < 3; ++a) {
          if (a >= d.dim) {
            lo[a] = hi[a] = 0;
            box.size[a] = 1;
            continue;
          }
          lo[a] = std::max<std::int64_t>(0, cell[a] - s + 1);
          hi[a] = std::min(cell[a], d.shape[a] - s);
        }
        for (std::int64_t i0 = lo[0]; i0 <= hi[0]; ++i0)
          for (std::int64_t i1 = lo[1]; i1 <= hi[1]; ++i1)
            for (std::int64_t i2 = lo[2]; i2 <= hi[2]; ++i2) {
              box.lower = {i0, i1, i2};
              fn(box);
            }
      }
      break;
    }
    case BasisKind::Rectangles: {
      std::array<std::vector<std::pair<std::int64_t, std::int64_t>>, 3> axis;
      for (int a = 0; a < 3; ++a) {
        if (a >= d.dim) {
          axis[a] = {{1, 0}};
          continue;
        }
        for (std::int64_t s = 1; s <= d.shape[a]; ++s) {
          const std::int64_t lo = std::max<std::int64_t>(0, cell[a] - s + 1);
          const std::int64_t hi = std::min(cell[a], d.shape[a] - s);
          for (std::int64_t l = lo; l <= hi; ++l) axis[a].push_back({s, l});
        }
      }
      for (const auto& [s0, l0] : axis[0])
        for (const auto& [s1, l1] : axis[1])
          for (const auto& [s2, l2] : axis[2]) {
            box.size = {s0, s1, s2};
            box.lower = {l0, l1, l2};
            fn(box);
          }
      break;
    }
  }
}

inline std::vector<Box> sets_containing(const Basis& b, const Index3& cell) {
  std::vector<Box> out;
  for_each_set_containing(b, cell, [&](const Box& box) { out.push_back(box); });
  return out;
}

// Whether the box is a member of the family (used for hierarchy checks).
inline bool is_member_set(const Basis& b, const Box& box) {
  const Domain& d = b.domain;
  if (!box.inside(d)) return false;
  for (int a = d.dim; a < 3; ++a)
    if (box.lower[a] != 0 || box.size[a] != 1) return false;
  switch (b.kind) {
    case BasisKind::Rectangles:
      return true;
    case BasisKind::Cubes: {
      for (int a = 1; a < d.dim; ++a)
        if (box.size[a] != box.size[0]) return false;
      return true;
    }
    case BasisKind::Dyadic: {
      const std::int64_t s = box.size[0];
      if (!is_power_of_two(s)) return false;
      for (int a = 0; a < d.dim; ++a)
        if (box.size[a] != s || box.lower[a] % s != 0) return false;
      return true;
    }
  }
  return false;
}

// Finite union of family members with its cell mask; members are kept
// deduplicated in canonical order.
struct SetUnion {
  std::vector<Box> members;
  CellSet cells;

  double measure() const { return cells.measure(); }
};

inline SetUnion make_union(const Domain& d, std::vector<Box> boxes) {
  std::sort(boxes.begin(), boxes.end());
  boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());
  SetUnion u;
  u.cells = CellSet(d);
  for (const Box& b : boxes) {
    if (!b.inside(d)) throw std::invalid_argument("union member outside domain");
    u.cells.insert(b);
  }
  u.members = std::move(boxes);
  return u;
}

// k draws with replacement, deduplicated.
inline SetUnion random_union(const Basis& b, std::int64_t k, SplitMix64& rng) {
  if (k < 1) throw std::invalid_argument("union draw count must be >= 1");
  const std::int64_t total = count_sets(b);
  std::vector<Box> boxes;
  boxes.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i)
    boxes.push_back(nth_set(b, static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(total)))));
  return make_union(b.domain, std::move(boxes));
}

// ---- JSON encodings ----------------------------------------------------------

inline nlohmann::ordered_json box_to_json(const Box& box, int dim) {
  nlohmann::ordered_json j;
  j["lower"] = nlohmann::ordered_json::array();
  j["size"] = nlohmann::ordered_json::array();
  for (int a = 0; a < dim; ++a) {
    j["lower"].push_back(box.lower[a]);
    j["size"].push_back(box.size[a]);
  }
  return j;
}

inline Box box_from_json(const nlohmann::json& j) {
  Box box;
  const auto& lower = j.at("lower");
  const auto& size = j.at("size");
  if (lower.size() != size.size() || lower.empty() || lower.size() > 3)
    throw std::invalid_argument("box json must carry 1..3 lower/size entries");
  for (std::size_t a = 0; a < lower.size(); ++a) {
    box.lower[a] = lower[a].get<std::int64_t>();
    box.size[a] = size[a].get<std::int64_t>();
  }
  return box;
}

inline nlohmann::ordered_json union_to_json(const SetUnion& u, int dim) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Box& b : u.members) arr.push_back(box_to_json(b, dim));
  return arr;
}

}  // namespace maxop
