#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <maxop/maxop.hpp>

#include "support/oracles.hpp"

using namespace maxop;

namespace {

Box front_box(std::int64_t n) {
  Box b;
  b.size = {n, 1, 1};
  return b;
}

GridFunction line_fn(std::initializer_list<double> vals) {
  return GridFunction(Domain::line(static_cast<std::int64_t>(vals.size())),
                      std::vector<double>(vals));
}

}  // namespace

TEST_CASE("mean kinds validate their exponents") {
  CHECK_THROWS_AS(MeanKind::power(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MeanKind::power(kInf), std::invalid_argument);
  CHECK_THROWS_AS(MeanKind::power(std::nan("")), std::invalid_argument);
  CHECK(MeanKind::power(1.0).tag == MeanKind::Tag::Arithmetic);
  CHECK(MeanKind::power(-1.0).tag == MeanKind::Tag::Harmonic);
  CHECK(MeanKind::power(0.5).is_power());
  CHECK(MeanKind::geometric().name() == "geometric");
}

TEST_CASE("classic means of {1,2,4} hit their closed forms") {
  const GridFunction f = line_fn({1.0, 2.0, 4.0, 9.0});
  const Box b = front_box(3);
  CHECK(*set_mean(MeanKind::arithmetic(), f, b) == Catch::Approx(7.0 / 3.0).epsilon(1e-15));
  CHECK(*set_mean(MeanKind::geometric(), f, b) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(*set_mean(MeanKind::harmonic(), f, b) == Catch::Approx(12.0 / 7.0).epsilon(1e-15));
  CHECK(*set_mean(MeanKind::power(2.0), f, b) == Catch::Approx(std::sqrt(7.0)).epsilon(1e-15));
  CHECK(*set_mean(MeanKind::power(-2.0), f, b) ==
        Catch::Approx(std::sqrt(16.0 / 7.0)).epsilon(1e-14));
}

TEST_CASE("weighted means use the sigma masses") {
  const GridFunction f = line_fn({1.0, 2.0, 4.0, 9.0});
  const GridFunction s = line_fn({1.0, 2.0, 1.0, 0.0});
  const Box b = front_box(3);
  CHECK(*set_mean(MeanKind::arithmetic(), f, b, &s) == Catch::Approx(9.0 / 4.0).epsilon(1e-15));
  CHECK(*set_mean(MeanKind::harmonic(), f, b, &s) == Catch::Approx(16.0 / 9.0).epsilon(1e-15));
  CHECK(*set_mean(MeanKind::geometric(), f, b, &s) == Catch::Approx(2.0).epsilon(1e-15));

  // The sigma-null last cell contributes nothing even when f is infinite there.
  GridFunction g = line_fn({3.0, 3.0, 3.0, kInf});
  Box all = front_box(4);
  CHECK(*set_mean(MeanKind::arithmetic(), g, all, &s) == 3.0);

  // A sigma-null set has no mean.
  const GridFunction zero = line_fn({0.0, 0.0, 0.0, 0.0});
  CHECK_FALSE(set_mean(MeanKind::arithmetic(), f, b, &zero).has_value());
}

TEST_CASE("extended real conventions in each mean kind") {
  // Zero wins for harmonic/geometric, even against +inf.
  CHECK(*set_mean(MeanKind::harmonic(), line_fn({0.0, 5.0}), front_box(2)) == 0.0);
  CHECK(*set_mean(MeanKind::geometric(), line_fn({0.0, kInf}), front_box(2)) == 0.0);
  // +inf wins for arithmetic and positive powers.
  CHECK(*set_mean(MeanKind::arithmetic(), line_fn({kInf, 1.0}), front_box(2)) == kInf);
  CHECK(*set_mean(MeanKind::power(0.5), line_fn({kInf, 1.0}), front_box(2)) == kInf);
  CHECK(*set_mean(MeanKind::geometric(), line_fn({kInf, 1.0}), front_box(2)) == kInf);
  // +inf contributes a zero reciprocal to the harmonic mean.
  CHECK(*set_mean(MeanKind::harmonic(), line_fn({kInf, 2.0}), front_box(2)) == 4.0);
  CHECK(*set_mean(MeanKind::power(-1.0), line_fn({kInf, 2.0}), front_box(2)) == 4.0);
  // f == inf a.e. gives an infinite harmonic mean.
  CHECK(*set_mean(MeanKind::harmonic(), line_fn({kInf, kInf}), front_box(2)) == kInf);
  // Negative powers: zero wins; positive powers: zero is just a zero term.
  CHECK(*set_mean(MeanKind::power(-0.5), line_fn({0.0, 4.0}), front_box(2)) == 0.0);
  CHECK(*set_mean(MeanKind::power(0.5), line_fn({0.0, 4.0}), front_box(2)) ==
        Catch::Approx(1.0).epsilon(1e-15));  // ((0+2)/2)^2
  // All-zero data under a positive power: the mean is zero.
  CHECK(*set_mean(MeanKind::power(0.5), line_fn({0.0, 0.0}), front_box(2)) == 0.0);
  // All-inf data under a negative power: the mean is infinite.
  CHECK(*set_mean(MeanKind::power(-0.5), line_fn({kInf, kInf}), front_box(2)) == kInf);
}

TEST_CASE("power means increase with the exponent") {
  SplitMix64 rng(99);
  const Domain d = Domain::line(16);
  GridFunction f(d);
  for (double& v : f.values) v = 0.1 + 3.0 * rng.next_double();
  GridFunction s(d);
  for (double& v : s.values) v = 0.25 + rng.next_double();
  const double exps[] = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  const Box b = front_box(16);
  double prev = 0.0;
  bool first = true;
  for (double t : exps) {
    const double m = *set_mean(MeanKind::power(t), f, b, &s);
    if (!first) CHECK(prev <= m * (1.0 + 1e-12));
    // The geometric mean sits between adjacent signs.
    prev = m;
    first = false;
  }
  const double gm = *set_mean(MeanKind::geometric(), f, b, &s);
  CHECK(*set_mean(MeanKind::power(-0.5), f, b, &s) <= gm * (1.0 + 1e-12));
  CHECK(gm <= *set_mean(MeanKind::power(0.5), f, b, &s) * (1.0 + 1e-12));
}

TEST_CASE("accumulator, table, and pyramid agree with the naive oracle") {
  SplitMix64 rng(7);
  const Domain domains[] = {Domain::line(16), Domain::square(8, 4)};
  const MeanKind kinds[] = {MeanKind::arithmetic(), MeanKind::harmonic(), MeanKind::geometric(),
                            MeanKind::power(0.5),   MeanKind::power(-0.5), MeanKind::power(3.0)};
  for (const Domain& d : domains) {
    GridFunction f(d), s(d);
    for (double& v : f.values) v = std::exp(1.2 * rng.next_normal());
    for (double& v : s.values) v = rng.next_double() < 0.2 ? 0.0 : 0.5 + rng.next_double();
    f.values[0] = 0.0;
    f.values[2] = kInf;
    const Basis rects{BasisKind::Rectangles, d};
    const std::vector<Box> boxes = enumerate_all(rects);
    for (MeanKind kind : kinds) {
      MeanTable table(kind, f, &s);
      MeanTable table_leb(kind, f, nullptr);
      for (const Box& b : boxes) {
        {
          const auto got = table.box_mean(b);
          const auto want = oracle::naive_box_mean(kind, f, b, &s);
          REQUIRE(got.has_value() == want.has_value());
          if (got) CHECK(oracle::close_ext(*got, *want, 1e-12));
          const auto direct = set_mean(kind, f, b, &s);
          REQUIRE(direct.has_value() == want.has_value());
          if (direct) CHECK(oracle::close_ext(*direct, *want, 1e-12));
        }
        {
          const auto got = table_leb.box_mean(b);
          const auto want = oracle::naive_box_mean(kind, f, b, nullptr);
          REQUIRE(got.has_value() == want.has_value());
          if (got) CHECK(oracle::close_ext(*got, *want, 1e-12));
        }
      }
      // Pyramid nodes are exactly the dyadic boxes.
      DyadicPyramid pyr(kind, f, &s);
      for (int k = 0; k <= pyr.top_level(); ++k) {
        const Index3 shape = pyr.level_shape(k);
        Index3 node;
        std::int64_t idx = 0;
        for (node[0] = 0; node[0] < shape[0]; ++node[0])
          for (node[1] = 0; node[1] < shape[1]; ++node[1])
            for (node[2] = 0; node[2] < shape[2]; ++node[2], ++idx) {
              const Box b = pyr.node_box(k, node);
              const auto want = oracle::naive_box_mean(kind, f, b, &s);
              const auto got = pyr.node_mean(k, idx);
              REQUIRE(got.has_value() == want.has_value());
              if (got) CHECK(oracle::close_ext(*got, *want, 1e-12));
              double mass = 0.0;
              for_each_cell(b, [&](const Index3& c) { mass += s.at(c); });
              CHECK(pyr.node_mass(k, idx) == Catch::Approx(mass).margin(1e-12));
            }
      }
    }
  }
}

TEST_CASE("cell set means match box means on the same cells") {
  const GridFunction f = line_fn({1.0, 2.0, 4.0, 8.0});
  CellSet cells(f.domain);
  Box b = front_box(3);
  cells.insert(b);
  for (MeanKind kind : {MeanKind::arithmetic(), MeanKind::harmonic(), MeanKind::geometric(),
                        MeanKind::power(0.5)}) {
    CHECK(*set_mean(kind, f, cells) == Catch::Approx(*set_mean(kind, f, b)).epsilon(1e-14));
  }
}

TEST_CASE("power mean tables stay stable across extreme magnitudes") {
  // Values spanning 600 orders of magnitude: naive pow would overflow, the
  // rescaled table and the log-sum-exp accumulator must not.
  const GridFunction f = line_fn({1e+300, 1e-300});
  const Box b = front_box(2);
  {
    const double want = 1.0;  // geometric mean
    CHECK(*set_mean(MeanKind::geometric(), f, b) == Catch::Approx(want).epsilon(1e-12));
    MeanTable table(MeanKind::geometric(), f, nullptr);
    CHECK(*table.box_mean(b) == Catch::Approx(want).epsilon(1e-12));
  }
  {
    // t = 0.5: ((a^t + b^t)/2)^2 with a = 1e300 dominating.
    const double want = std::pow(0.5 * std::pow(1e300, 0.5), 2.0);
    CHECK(*set_mean(MeanKind::power(0.5), f, b) == Catch::Approx(want).epsilon(1e-12));
    MeanTable table(MeanKind::power(0.5), f, nullptr);
    CHECK(*table.box_mean(b) == Catch::Approx(want).epsilon(1e-12));
  }
  {
    // t = -0.5: the small value dominates.
    const double want = std::pow(0.5 * std::pow(1e-300, -0.5), -2.0);
    CHECK(*set_mean(MeanKind::power(-0.5), f, b) == Catch::Approx(want).epsilon(1e-12));
    MeanTable table(MeanKind::power(-0.5), f, nullptr);
    CHECK(*table.box_mean(b) == Catch::Approx(want).epsilon(1e-12));
  }
  {
    const GridFunction big = line_fn({1e+300, 1e+300});
    CHECK(*set_mean(MeanKind::power(0.5), big, b) == Catch::Approx(1e300).epsilon(1e-12));
    MeanTable table(MeanKind::power(0.5), big, nullptr);
    CHECK(*table.box_mean(b) == Catch::Approx(1e300).epsilon(1e-12));
  }
}

TEST_CASE("sum tables match naive sums in three dimensions") {
  const Domain d = Domain::cube3(4, 2, 8);
  SplitMix64 rng(3);
  std::vector<double> vals(static_cast<std::size_t>(d.cell_count()));
  for (double& v : vals) v = rng.next_double();
  detail::SumTable<long double> table(d, [&](std::int64_t i) {
    return static_cast<long double>(vals[static_cast<std::size_t>(i)]);
  });
  SplitMix64 pick(11);
  for (int trial = 0; trial < 200; ++trial) {
    Box b;
    for (int a = 0; a < 3; ++a) {
      b.size[a] = 1 + static_cast<std::int64_t>(pick.next_below(d.shape[a]));
      b.lower[a] = static_cast<std::int64_t>(pick.next_below(d.shape[a] - b.size[a] + 1));
    }
    long double want = 0.0L;
    for_each_cell(b, [&](const Index3& c) {
      want += vals[static_cast<std::size_t>(d.flat_index(c))];
    });
    CHECK(static_cast<double>(table.box_sum(b)) ==
          Catch::Approx(static_cast<double>(want)).epsilon(1e-13));
  }
}

TEST_CASE("box averager absorbs infinities") {
  const Domain d = Domain::line(4);
  BoxAverager avg(d, [&](std::int64_t i) { return i == 2 ? kInf : static_cast<double>(i); });
  CHECK(avg.box_sum(front_box(2)) == 1.0);
  CHECK(avg.box_sum(front_box(3)) == kInf);
  CHECK(avg.box_average(front_box(2)) == 0.5);
  BoxAverager neg(d, [&](std::int64_t i) { return i == 0 ? -kInf : 1.0; });
  CHECK(neg.box_sum(front_box(1)) == -kInf);
}
