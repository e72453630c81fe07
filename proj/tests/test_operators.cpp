#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <maxop/maxop.hpp>

#include "support/oracles.hpp"

using namespace maxop;

namespace {

GridFunction random_field(const Domain& d, std::uint64_t seed, bool with_zero_and_inf) {
  SplitMix64 rng(seed);
  GridFunction f(d);
  for (double& v : f.values) v = std::exp(0.8 * rng.next_normal());
  if (with_zero_and_inf && f.values.size() >= 4) {
    f.values[1] = 0.0;
    f.values[f.values.size() / 2] = kInf;
  }
  return f;
}

GridFunction random_weight(const Domain& d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  GridFunction s(d);
  for (double& v : s.values) v = rng.next_double() < 0.25 ? 0.0 : 0.25 + rng.next_double();
  return s;
}

}  // namespace

TEST_CASE("maximal fields match the brute-force oracle") {
  const MeanKind kinds[] = {MeanKind::arithmetic(), MeanKind::harmonic(), MeanKind::geometric(),
                            MeanKind::power(0.5), MeanKind::power(-0.5)};
  const Domain domains[] = {Domain::line(16), Domain::square(8, 4)};
  int seed = 100;
  for (const Domain& d : domains) {
    const GridFunction f = random_field(d, static_cast<std::uint64_t>(seed++), true);
    const GridFunction s = random_weight(d, static_cast<std::uint64_t>(seed++));
    for (BasisKind bk : {BasisKind::Dyadic, BasisKind::Cubes, BasisKind::Rectangles}) {
      const Basis basis{bk, d};
      for (MeanKind kind : kinds) {
        CHECK(oracle::fields_close(maximal(kind, basis, f),
                                   oracle::naive_maximal(kind, basis, f), 1e-9));
        CHECK(oracle::fields_close(maximal(kind, basis, f, &s),
                                   oracle::naive_maximal(kind, basis, f, &s), 1e-9));
        CHECK(oracle::fields_close(maximal_auto(kind, basis, f, &s),
                                   oracle::naive_maximal(kind, basis, f, &s), 1e-9));
      }
    }
  }
}

TEST_CASE("minimal operator matches the brute-force oracle") {
  const Domain domains[] = {Domain::line(16), Domain::square(8, 4)};
  int seed = 300;
  for (const Domain& d : domains) {
    GridFunction f = random_field(d, static_cast<std::uint64_t>(seed++), false);
    f.values[0] = kInf;  // a genuine +inf can survive into a minimum
    for (BasisKind bk : {BasisKind::Dyadic, BasisKind::Cubes, BasisKind::Rectangles}) {
      const Basis basis{bk, d};
      CHECK(oracle::fields_close(minimal_operator(basis, f), oracle::naive_minimal(basis, f),
                                 1e-9));
    }
  }
  // All-infinite input: every average is +inf, so the minimum is too.
  const Domain d = Domain::line(4);
  GridFunction inf_f(d, std::vector<double>{kInf, kInf, kInf, kInf});
  const GridFunction m = minimal_operator(Basis{BasisKind::Dyadic, d}, inf_f);
  for (double v : m.values) CHECK(v == kInf);
}

TEST_CASE("fast dyadic route equals the scatter route") {
  const MeanKind kinds[] = {MeanKind::arithmetic(), MeanKind::harmonic(), MeanKind::geometric(),
                            MeanKind::power(0.5), MeanKind::power(-2.0)};
  const Domain domains[] = {Domain::line(32), Domain::square(8, 8), Domain::cube3(4, 4, 4)};
  int seed = 500;
  for (const Domain& d : domains) {
    const GridFunction f = random_field(d, static_cast<std::uint64_t>(seed++), true);
    const GridFunction s = random_weight(d, static_cast<std::uint64_t>(seed++));
    const Basis basis{BasisKind::Dyadic, d};
    for (MeanKind kind : kinds) {
      for (const GridFunction* sigma : {static_cast<const GridFunction*>(nullptr), &s}) {
        const GridFunction fast = maximal_fast_dyadic(kind, f, sigma);
        const GridFunction slow =
            detail::scatter_extremal_field(kind, basis, f, sigma, false, nullptr);
        CHECK(oracle::fields_close(fast, slow, 1e-12));
      }
    }
  }
}

TEST_CASE("witnesses attain the field value, contain their cell, and break ties canonically") {
  const Domain d = Domain::line(16);
  const GridFunction f = random_field(d, 41, true);
  const GridFunction s = random_weight(d, 42);
  for (BasisKind bk : {BasisKind::Dyadic, BasisKind::Cubes, BasisKind::Rectangles}) {
    const Basis basis{bk, d};
    std::vector<Box> wit;
    const GridFunction field = maximal(MeanKind::arithmetic(), basis, f, &s, &wit);
    REQUIRE(wit.size() == field.values.size());
    for (std::int64_t i = 0; i < d.cell_count(); ++i) {
      if (field.values[static_cast<std::size_t>(i)] == 0.0) continue;  // no contributing set
      CHECK(wit[static_cast<std::size_t>(i)].contains(d.unflatten(i)));
      const auto m = set_mean(MeanKind::arithmetic(), f, wit[static_cast<std::size_t>(i)], &s);
      REQUIRE(m.has_value());
      CHECK(oracle::close_ext(*m, field.values[static_cast<std::size_t>(i)], 1e-12));
    }
  }
  // Constant data: every mean ties at 1, so the canonical witness is the cell.
  GridFunction ones(d, 1.0);
  std::vector<Box> wit;
  maximal(MeanKind::arithmetic(), Basis{BasisKind::Cubes, d}, ones, nullptr, &wit);
  for (std::int64_t i = 0; i < d.cell_count(); ++i) {
    CHECK(wit[static_cast<std::size_t>(i)].size[0] == 1);
    CHECK(wit[static_cast<std::size_t>(i)].lower[0] == i);
  }
}

TEST_CASE("harmonic to geometric limit report") {
  // Frozen two-cell example: f = {1,4}, dyadic. The geometric field is
  // {2,4}; the power(-r) field is {root, 4} with root = ((1+4^-r)/2)^(-1/r).
  const GridFunction f(Domain::line(2), std::vector<double>{1.0, 4.0});
  const Basis basis{BasisKind::Dyadic, f.domain};
  const auto rep = limit_harmonic_to_geometric(basis, f, {0.5, 0.1});
  REQUIRE(rep.rows.size() == 2);
  const double root_half = std::pow(0.5 * (1.0 + std::pow(4.0, -0.5)), -2.0);
  CHECK(rep.rows[0].r == 0.5);
  CHECK(rep.rows[0].sup_gap == Catch::Approx(2.0 - root_half).epsilon(1e-13));
  CHECK(rep.rows[0].mean_gap == Catch::Approx(0.5 * (2.0 - root_half)).epsilon(1e-13));
  CHECK(rep.rows[1].sup_gap < rep.rows[0].sup_gap);
  CHECK(rep.rows[1].sup_gap >= 0.0);

  CHECK_THROWS_AS(limit_harmonic_to_geometric(basis, f, {0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(limit_harmonic_to_geometric(basis, f, {-0.1}), std::invalid_argument);

  // Random positive data: gaps are nonnegative and nonincreasing along the schedule.
  const GridFunction g = random_field(Domain::line(64), 77, false);
  const auto rep2 =
      limit_harmonic_to_geometric(Basis{BasisKind::Dyadic, g.domain}, g, {1.0, 0.5, 0.1, 0.01});
  const double noise = 1e-9 * (1.0 + g.max_value());
  for (std::size_t i = 0; i < rep2.rows.size(); ++i) {
    CHECK(rep2.rows[i].sup_gap >= -noise);
    CHECK(rep2.rows[i].mean_gap <= rep2.rows[i].sup_gap + noise);
    if (i > 0) CHECK(rep2.rows[i].sup_gap <= rep2.rows[i - 1].sup_gap + noise);
  }
  CHECK(rep2.csv().rfind("r,sup_gap,mean_gap\n", 0) == 0);
}

TEST_CASE("stopping cubes decompose the superlevel set exactly") {
  const Domain d = Domain::line(32);
  const GridFunction f = random_field(d, 91, false);
  GridFunction s = random_weight(d, 92);
  // Make one whole dyadic subtree sigma-null to exercise the skip.
  for (std::size_t i = 8; i < 16; ++i) s.values[i] = 0.0;

  const GridFunction field = maximal_fast_dyadic(MeanKind::harmonic(), f, &s);
  for (double lambda : {0.25, 0.5, 1.0, 2.0}) {
    const std::vector<Box> cubes = dyadic_stopping_cubes(f, &s, lambda);
    // Disjoint, and each is a dyadic box whose mean exceeds lambda.
    CellSet covered(d);
    for (const Box& b : cubes) {
      for_each_cell(b, [&](const Index3& c) {
        CHECK_FALSE(covered.contains(d.flat_index(c)));
      });
      covered.insert(b);
      const auto m = set_mean(MeanKind::harmonic(), f, b, &s);
      REQUIRE(m.has_value());
      CHECK(*m > lambda);
      // Maximality: the parent box (if any) does not exceed lambda.
      if (b.size[0] < d.shape[0]) {
        Box parent;
        parent.size = {b.size[0] * 2, 1, 1};
        parent.lower = {(b.lower[0] / (b.size[0] * 2)) * (b.size[0] * 2), 0, 0};
        const auto pm = set_mean(MeanKind::harmonic(), f, parent, &s);
        if (pm) CHECK_FALSE(*pm > lambda);
      }
    }
    // Union equals the superlevel set of the maximal field.
    for (std::int64_t i = 0; i < d.cell_count(); ++i) {
      const bool in_super = field.values[static_cast<std::size_t>(i)] > lambda;
      CHECK(covered.contains(i) == in_super);
    }
  }
}

TEST_CASE("pointwise chain: minimal, harmonic, power, geometric, arithmetic") {
  const Domain d = Domain::line(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GridFunction f = random_field(d, seed, false);
    for (BasisKind bk : {BasisKind::Dyadic, BasisKind::Cubes, BasisKind::Rectangles}) {
      const Basis basis{bk, d};
      const GridFunction mn = minimal_operator(basis, f);
      const GridFunction h = maximal_auto(MeanKind::harmonic(), basis, f);
      const GridFunction pr = maximal_auto(MeanKind::power(-0.5), basis, f);
      const GridFunction g = maximal_auto(MeanKind::geometric(), basis, f);
      const GridFunction ps = maximal_auto(MeanKind::power(0.5), basis, f);
      const GridFunction m = maximal_auto(MeanKind::arithmetic(), basis, f);
      CHECK(oracle::leq_fields(mn, h, 1e-12));
      CHECK(oracle::leq_fields(h, pr, 1e-12));
      CHECK(oracle::leq_fields(pr, g, 1e-12));
      CHECK(oracle::leq_fields(g, ps, 1e-12));
      CHECK(oracle::leq_fields(ps, m, 1e-12));
    }
  }
}
