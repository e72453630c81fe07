#pragma once

// Naive reference implementations used only by the test suite. Everything
// here is written from the documented conventions with plain loops and no
// shared code with the fast paths, so agreement is meaningful:
//   - extended reals in [0, +inf], 1/0 = inf, log 0 = -inf
//   - a zero inside a harmonic/geometric mean forces 0 (zero beats +inf)
//   - +inf inside an arithmetic or positive-power mean forces +inf
//   - sigma <= 0 cells contribute nothing; sigma-null sets have no mean

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <maxop/maxop.hpp>

namespace oracle {

using maxop::Box;
using maxop::kInf;

struct Sample {
  double value;
  double weight;
};

inline std::optional<double> naive_mean(maxop::MeanKind kind, const std::vector<Sample>& data) {
  double mass = 0.0;
  for (const Sample& s : data)
    if (s.weight > 0.0) mass += s.weight;
  if (!(mass > 0.0)) return std::nullopt;

  switch (kind.tag) {
    case maxop::MeanKind::Tag::Arithmetic: {
      double sum = 0.0;
      for (const Sample& s : data) {
        if (s.weight <= 0.0) continue;
        if (std::isinf(s.value)) return kInf;
        sum += s.weight * s.value;
      }
      return sum / mass;
    }
    case maxop::MeanKind::Tag::Harmonic: {
      double sum = 0.0;
      for (const Sample& s : data) {
        if (s.weight <= 0.0) continue;
        if (s.value == 0.0) return 0.0;
        if (!std::isinf(s.value)) sum += s.weight / s.value;
      }
      return sum > 0.0 ? mass / sum : kInf;
    }
    case maxop::MeanKind::Tag::Geometric: {
      for (const Sample& s : data)
        if (s.weight > 0.0 && s.value == 0.0) return 0.0;
      double sum = 0.0;
      for (const Sample& s : data) {
        if (s.weight <= 0.0) continue;
        if (std::isinf(s.value)) return kInf;
        sum += s.weight * std::log(s.value);
      }
      return std::exp(sum / mass);
    }
    case maxop::MeanKind::Tag::Power: {
      const double t = kind.exponent;
      for (const Sample& s : data) {
        if (s.weight <= 0.0) continue;
        if (t < 0.0 && s.value == 0.0) return 0.0;
        if (t > 0.0 && std::isinf(s.value)) return kInf;
      }
      // Remaining terms are finite: v = 0 with t > 0 and v = inf with t < 0
      // both contribute exactly 0.
      double sum = 0.0;
      for (const Sample& s : data) {
        if (s.weight <= 0.0) continue;
        if (s.value == 0.0 || std::isinf(s.value)) continue;
        sum += s.weight * std::pow(s.value, t);
      }
      if (sum <= 0.0) return t > 0.0 ? 0.0 : kInf;
      return std::pow(sum / mass, 1.0 / t);
    }
  }
  return std::nullopt;
}

inline std::optional<double> naive_box_mean(maxop::MeanKind kind, const maxop::GridFunction& f,
                                            const Box& box,
                                            const maxop::GridFunction* sigma = nullptr) {
  std::vector<Sample> data;
  maxop::for_each_cell(box, [&](const maxop::Index3& c) {
    const std::int64_t i = f.domain.flat_index(c);
    data.push_back({f[i], sigma ? (*sigma)[i] : 1.0});
  });
  return naive_mean(kind, data);
}

// Brute-force extremal field: every family member, every covered cell.
inline maxop::GridFunction naive_extremal_field(maxop::MeanKind kind, const maxop::Basis& basis,
                                                const maxop::GridFunction& f,
                                                const maxop::GridFunction* sigma, bool take_min) {
  const maxop::Domain& d = f.domain;
  std::vector<double> field(static_cast<std::size_t>(d.cell_count()), take_min ? kInf : -kInf);
  maxop::for_each_set(basis, [&](const Box& box) {
    const auto m = naive_box_mean(kind, f, box, sigma);
    if (!m) return;
    maxop::for_each_cell(box, [&](const maxop::Index3& c) {
      double& slot = field[static_cast<std::size_t>(d.flat_index(c))];
      if (take_min ? *m < slot : *m > slot) slot = *m;
    });
  });
  maxop::GridFunction out(d);
  for (std::size_t i = 0; i < field.size(); ++i) {
    double v = field[i];
    if (!take_min && v == -kInf) v = 0.0;
    out.values[i] = v;
  }
  return out;
}

inline maxop::GridFunction naive_maximal(maxop::MeanKind kind, const maxop::Basis& basis,
                                         const maxop::GridFunction& f,
                                         const maxop::GridFunction* sigma = nullptr) {
  return naive_extremal_field(kind, basis, f, sigma, /*take_min=*/false);
}

inline maxop::GridFunction naive_minimal(const maxop::Basis& basis, const maxop::GridFunction& f) {
  return naive_extremal_field(maxop::MeanKind::arithmetic(), basis, f, nullptr, /*take_min=*/true);
}

// Extended-real comparison with relative tolerance; inf matches only inf.
inline bool close_ext(double a, double b, double rel) {
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0);
  return std::fabs(a - b) <= rel * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

inline bool fields_close(const maxop::GridFunction& a, const maxop::GridFunction& b, double rel) {
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (!close_ext(a.values[i], b.values[i], rel)) return false;
  return true;
}

// Pointwise chain a <= b up to relative tolerance; +inf dominates everything.
inline bool leq_fields(const maxop::GridFunction& a, const maxop::GridFunction& b, double rel) {
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double lo = a.values[i], hi = b.values[i];
    if (std::isinf(hi)) continue;
    if (std::isinf(lo)) return false;
    if (lo > hi + rel * (1.0 + std::fabs(hi))) return false;
  }
  return true;
}

}  // namespace oracle
