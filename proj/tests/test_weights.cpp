#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <maxop/maxop.hpp>

#include "support/oracles.hpp"

using namespace maxop;

namespace {

GridFunction gf(std::vector<double> v) {
  const auto n = static_cast<std::int64_t>(v.size());
  return GridFunction(Domain::line(n), std::move(v));
}

GridFunction random_pos_weight(const Domain& d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  GridFunction w(d);
  for (double& v : w.values) v = std::exp(rng.next_normal());
  return w;
}

}  // namespace

TEST_CASE("A_p constant: frozen value, witness, and degenerate weights") {
  const GridFunction w = gf({1, 1, 1, 8});
  const Basis basis{BasisKind::Dyadic, w.domain};
  const ConstantReport rep = ap_constant(w, basis, 2.0);
  CHECK(rep.name == "ap");
  CHECK(rep.value == Catch::Approx(81.0 / 32.0).epsilon(1e-13));
  REQUIRE(rep.witness.has_value());
  CHECK(rep.witness->lower[0] == 2);
  CHECK(rep.witness->size[0] == 2);
  CHECK(rep.params["p"] == 2.0);

  CHECK(ap_constant(constant_weight(w.domain, 3.0), basis, 1.5).value ==
        Catch::Approx(1.0));

  CHECK_THROWS_AS(ap_constant(w, basis, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ap_constant(w, basis, 0.5), std::invalid_argument);

  // A weight vanishing on a cell fails A_p outright.
  CHECK(ap_constant(gf({0, 1}), Basis{BasisKind::Dyadic, Domain::line(2)}, 2.0).value == kInf);
}

TEST_CASE("A_infty constant: AM/GM ratio with witnesses") {
  const GridFunction w = gf({1, 4});
  const ConstantReport rep = ainfty_constant(w, Basis{BasisKind::Dyadic, w.domain});
  CHECK(rep.name == "ainfty");
  CHECK(rep.value == Catch::Approx(1.25).epsilon(1e-13));
  REQUIRE(rep.witness.has_value());
  CHECK(rep.witness->lower[0] == 0);
  CHECK(rep.witness->size[0] == 2);

  // Constant weights tie at 1 everywhere; canonical witness is the first cell.
  const GridFunction ones = constant_weight(Domain::line(8), 1.0);
  const ConstantReport flat = ainfty_constant(ones, Basis{BasisKind::Cubes, ones.domain});
  CHECK(flat.value == Catch::Approx(1.0));
  REQUIRE(flat.witness.has_value());
  CHECK(flat.witness->size[0] == 1);
  CHECK(flat.witness->lower[0] == 0);

  // A vanishing cell makes some geometric mean 0, so the ratio degenerates.
  const GridFunction spike = spike_weight(Domain::line(4), 0.0);
  CHECK(ainfty_constant(spike, Basis{BasisKind::Dyadic, spike.domain}).value == kInf);

  // A_infty <= A_p for every p > 1 (Jensen: GM <= dual-power mean chain).
  const GridFunction r = random_pos_weight(Domain::line(16), 7);
  const Basis rb{BasisKind::Dyadic, r.domain};
  const double ai = ainfty_constant(r, rb).value;
  for (double p : {1.5, 2.0, 3.0}) CHECK(ai <= ap_constant(r, rb, p).value + 1e-12);
}

TEST_CASE("doubling constant") {
  const GridFunction w = gf({1, 1, 1, 1, 1, 1, 8, 8});
  const ConstantReport rep = doubling_constant(w);
  CHECK(rep.name == "doubling");
  CHECK(rep.value == Catch::Approx(5.5).epsilon(1e-13));
  REQUIRE(rep.witness.has_value());
  // [4,6) doubles to [3,7); the size-4 tie [2,6) loses canonically.
  CHECK(rep.witness->size[0] == 2);
  CHECK(rep.witness->lower[0] == 4);

  // Lebesgue measure doubles exactly by 2^dim.
  const ConstantReport flat1 = doubling_constant(constant_weight(Domain::line(8), 1.0));
  CHECK(flat1.value == Catch::Approx(2.0));
  REQUIRE(flat1.witness.has_value());
  CHECK(flat1.witness->size[0] == 2);
  CHECK(flat1.witness->lower[0] == 1);
  CHECK(doubling_constant(constant_weight(Domain::square(8, 8), 1.0)).value ==
        Catch::Approx(4.0));

  // Too small for any concentric double: no admissible cube at all.
  const ConstantReport tiny = doubling_constant(gf({1, 2}));
  CHECK(tiny.value == 0.0);
  CHECK_FALSE(tiny.witness.has_value());

  // max_scale caps the cube side.
  const ConstantReport capped = doubling_constant(w, 2);
  CHECK(capped.value == Catch::Approx(5.5));
  CHECK(capped.params["max_scale"] == 2);
  REQUIRE(capped.witness.has_value());
  CHECK(capped.witness->size[0] <= 2);

  // A cube of zero mass with anything around it degenerates.
  CHECK(doubling_constant(spike_weight(Domain::line(8), 0.0)).value == kInf);
}

TEST_CASE("joint harmonic two-weight constant") {
  const GridFunction u = gf({4, 0});
  const GridFunction sig = constant_weight(u.domain, 1.0);
  const Basis basis{BasisKind::Dyadic, u.domain};
  const ConstantReport rep = joint_harmonic_constant(u, sig, basis, 1.0);
  CHECK(rep.name == "joint-harmonic");
  CHECK(rep.value == Catch::Approx(4.0));
  REQUIRE(rep.witness.has_value());
  CHECK(rep.witness->lower[0] == 0);
  CHECK(rep.witness->size[0] == 1);

  // sigma vanishing on a set forces +inf, even where u vanishes too.
  CHECK(joint_harmonic_constant(gf({0, 1}), gf({0, 1}), basis, 1.0).value == kInf);

  // With sigma == 1 the constant is just the largest cell value of u.
  const GridFunction r = random_pos_weight(Domain::line(32), 11);
  for (double p : {0.5, 1.0, 2.0}) {
    const double got =
        joint_harmonic_constant(r, constant_weight(r.domain, 1.0),
                                Basis{BasisKind::Dyadic, r.domain}, p)
            .value;
    CHECK(got == Catch::Approx(r.max_value()).epsilon(1e-12));
  }

  CHECK_THROWS_AS(joint_harmonic_constant(u, sig, basis, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(joint_harmonic_constant(u, sig, basis, -1.0), std::invalid_argument);
}

TEST_CASE("harmonic bump constant dominates the joint constant") {
  const GridFunction u = gf({4, 0});
  const GridFunction sig = constant_weight(u.domain, 1.0);
  const Basis basis{BasisKind::Dyadic, u.domain};
  const ConstantReport rep = bump_harmonic_constant(u, sig, basis, 1.0, 0.5);
  CHECK(rep.name == "bump-harmonic");
  CHECK(rep.value == Catch::Approx(4.0));

  CHECK_THROWS_AS(bump_harmonic_constant(u, sig, basis, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bump_harmonic_constant(u, sig, basis, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bump_harmonic_constant(u, sig, basis, 0.0, 0.5), std::invalid_argument);

  // Jensen: the r-mean of sigma sits below its arithmetic mean, so the bump
  // constant dominates the joint one for every 0 < r < 1.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GridFunction uu = random_pos_weight(Domain::line(16), seed);
    const GridFunction ss = random_pos_weight(Domain::line(16), seed + 100);
    const Basis b{BasisKind::Dyadic, uu.domain};
    for (double r : {0.25, 0.5, 0.75}) {
      const double joint = joint_harmonic_constant(uu, ss, b, 1.5).value;
      const double bump = bump_harmonic_constant(uu, ss, b, 1.5, r).value;
      CHECK(joint <= bump * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("arithmetic bump constant") {
  const GridFunction u = gf({4, 0});
  const GridFunction sig = constant_weight(u.domain, 1.0);
  const Basis basis{BasisKind::Dyadic, u.domain};
  const ConstantReport rep = bump_arithmetic_constant(u, sig, basis, 2.0, 2.0);
  CHECK(rep.name == "bump-arithmetic");
  CHECK(rep.value == Catch::Approx(2.0));
  REQUIRE(rep.witness.has_value());
  CHECK(rep.witness->lower[0] == 0);
  CHECK(rep.witness->size[0] == 1);

  CHECK_THROWS_AS(bump_arithmetic_constant(u, sig, basis, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(bump_arithmetic_constant(u, sig, basis, 2.0, 1.0), std::invalid_argument);

  // Raising r only raises the sigma factor (power-mean monotonicity).
  const GridFunction uu = random_pos_weight(Domain::line(16), 21);
  const GridFunction ss = random_pos_weight(Domain::line(16), 22);
  const Basis b{BasisKind::Dyadic, uu.domain};
  const double b2 = bump_arithmetic_constant(uu, ss, b, 2.0, 2.0).value;
  const double b4 = bump_arithmetic_constant(uu, ss, b, 2.0, 4.0).value;
  CHECK(b2 <= b4 * (1.0 + 1e-12));
}

TEST_CASE("two-weight A_infty constant") {
  const ConstantReport rep = twoweight_ainfty_constant(
      gf({1, 1}), gf({1, 4}), Basis{BasisKind::Dyadic, Domain::line(2)});
  CHECK(rep.name == "twoweight-ainfty");
  CHECK(rep.value == Catch::Approx(1.0));
  REQUIRE(rep.witness.has_value());
  CHECK(rep.witness->size[0] == 1);
  CHECK(rep.witness->lower[0] == 0);

  CHECK(twoweight_ainfty_constant(gf({1, 1}), gf({0, 1}),
                                  Basis{BasisKind::Dyadic, Domain::line(2)})
            .value == kInf);

  // With u == v this is exactly the one-weight A_infty constant.
  const GridFunction r = random_pos_weight(Domain::line(16), 31);
  const Basis b{BasisKind::Cubes, r.domain};
  CHECK(twoweight_ainfty_constant(r, r, b).value ==
        Catch::Approx(ainfty_constant(r, b).value).epsilon(1e-13));
}

TEST_CASE("condition A: exhaustive enumeration") {
  // w concentrated on the last cell: E = {0} is w-null but its superlevel
  // reaches the full domain, so the condition fails at +inf.
  const GridFunction w = gf({0, 0, 0, 1});
  const Basis basis{BasisKind::Dyadic, w.domain};
  const ConstantReport rep =
      condition_a_estimate(w, basis, 0.2, 200, 1, ConditionAMode::Exhaustive);
  CHECK(rep.name == "condition-a");
  CHECK(rep.value == kInf);
  CHECK(rep.witness_cells == std::vector<std::int64_t>{0});
  CHECK(rep.params["mode"] == "exhaustive");
  CHECK(rep.params["subsets"] == 15);

  // Lebesgue measure satisfies condition A with constant at most 1/alpha.
  const GridFunction ones = constant_weight(Domain::line(16), 1.0);
  const Basis b16{BasisKind::Dyadic, ones.domain};
  for (double alpha : {0.25, 0.5}) {
    const ConstantReport r =
        condition_a_estimate(ones, b16, alpha, 200, 1, ConditionAMode::Exhaustive);
    CHECK(r.value >= 1.0);
    CHECK(r.value <= 1.0 / alpha + 1e-12);
  }

  CHECK_THROWS_AS(condition_a_estimate(constant_weight(Domain::line(32), 1.0),
                                       Basis{BasisKind::Dyadic, Domain::line(32)}, 0.5, 10, 1,
                                       ConditionAMode::Exhaustive),
                  std::invalid_argument);
  CHECK_THROWS_AS(condition_a_estimate(w, basis, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(condition_a_estimate(w, basis, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(condition_a_estimate(w, basis, 0.5, 0), std::invalid_argument);
}

TEST_CASE("condition A: sampled mode is a reproducible lower bound") {
  const GridFunction w = random_pos_weight(Domain::line(8), 51);
  const Basis basis{BasisKind::Dyadic, w.domain};
  const ConstantReport exact =
      condition_a_estimate(w, basis, 0.5, 200, 1, ConditionAMode::Exhaustive);
  const ConstantReport sampled = condition_a_estimate(w, basis, 0.5, 60, 9);
  CHECK(sampled.params["mode"] == "sampled");
  CHECK(sampled.value <= exact.value + 1e-12);
  CHECK(sampled.value >= 1.0 - 1e-12);  // E = a whole set is always tried

  // The witness cells reproduce the reported ratio.
  CellSet e(w.domain);
  for (std::int64_t i : sampled.witness_cells) e.insert(i);
  REQUIRE(e.count() > 0);
  const auto ratio = detail::condition_a_ratio(w, basis, 0.5, e);
  REQUIRE(ratio.usable);
  CHECK(ratio.value == Catch::Approx(sampled.value).epsilon(1e-13));

  // Same seed, same answer; different thread counts, same answer.
  const ConstantReport again = condition_a_estimate(w, basis, 0.5, 60, 9);
  CHECK(again.value == sampled.value);
  CHECK(again.witness_cells == sampled.witness_cells);
  set_thread_count(4);
  const ConstantReport threaded = condition_a_estimate(w, basis, 0.5, 60, 9);
  set_thread_count(1);
  CHECK(threaded.value == sampled.value);
  CHECK(threaded.witness_cells == sampled.witness_cells);
}

TEST_CASE("supremum scans are independent of the thread count") {
  const GridFunction w = random_pos_weight(Domain::line(256), 61);
  const Basis basis{BasisKind::Cubes, w.domain};  // 32896 sets: crosses the chunking gate
  set_thread_count(1);
  const ConstantReport one = ap_constant(w, basis, 2.0);
  set_thread_count(4);
  const ConstantReport four = ap_constant(w, basis, 2.0);
  set_thread_count(1);
  CHECK(one.value == four.value);
  REQUIRE(one.witness.has_value());
  REQUIRE(four.witness.has_value());
  CHECK(one.witness->lower == four.witness->lower);
  CHECK(one.witness->size == four.witness->size);
}

TEST_CASE("constant reports serialize with inf spelled out") {
  const ConstantReport rep = ainfty_constant(
      spike_weight(Domain::line(4), 0.0), Basis{BasisKind::Dyadic, Domain::line(4)});
  const auto j = rep.to_json();
  CHECK(j["value"] == "inf");
  CHECK(j.contains("witness"));
  CHECK(j["basis"] == "dyadic");

  const ConstantReport fin = ainfty_constant(gf({1, 4}), Basis{BasisKind::Dyadic, Domain::line(2)});
  const auto jf = fin.to_json();
  CHECK(jf["value"] == 1.25);
  CHECK(jf["witness"]["lower"] == std::vector<std::int64_t>{0});
  CHECK(jf["witness"]["size"] == std::vector<std::int64_t>{2});
}
