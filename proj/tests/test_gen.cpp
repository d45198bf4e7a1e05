#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace bowsp;

TEST(Pcg32, ReferenceOutputs) {
  // first outputs of the reference pcg32 seeded with (42, 54)
  Pcg32 rng(42, 54);
  const std::vector<std::uint32_t> expect = {0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293, 0xbfa4784b, 0xcbed606e};
  for (auto e : expect) EXPECT_EQ(rng.next(), e);
}

TEST(Pcg32, UniformIntStaysInRangeAndCoversIt) {
  Pcg32 rng(1, 2);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(5, 15);
    ASSERT_GE(v, 5);
    ASSERT_LE(v, 15);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 11U);
}

TEST(Pcg32, PoissonMean) {
  Pcg32 rng(3, 4);
  double sum = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) sum += rng.poisson(2.0);
  EXPECT_NEAR(sum / draws, 2.0, 0.05);
}

TEST(Generator, DeterministicBytes) {
  GenParams p;
  p.k = 20;
  p.d = 2;
  p.e = 0.3;
  p.seed = 7;
  EXPECT_EQ(save_instance(generate(p)), save_instance(generate(p)));
  GenParams q = p;
  q.seed = 8;
  EXPECT_NE(save_instance(generate(p)), save_instance(generate(q)));
}

TEST(Generator, InstanceShape) {
  GenParams p;
  p.k = 12;
  p.d = 1.2;
  p.e = 0.3;
  p.seed = 5;
  const Schema s = generate(p);
  EXPECT_EQ(s.user_count(), 130);
  int sod = 0;
  int at_most = 0;
  int at_least = 0;
  std::set<std::uint64_t> most_scopes;
  std::set<std::uint64_t> least_scopes;
  for (const auto& c : s.constraints) {
    if (c.kind == ConstraintKind::SeparationOfDuty) {
      ++sod;
      EXPECT_EQ(c.table[0], kDefaultProhibitive);
    }
    if (c.kind == ConstraintKind::AtMost) {
      ++at_most;
      most_scopes.insert(c.scope.bits());
      EXPECT_EQ(c.scope_size(), 5);
      EXPECT_EQ(c.r, 3);
      EXPECT_GE(c.table[3], 3);
      EXPECT_LE(c.table[3], 5);
      EXPECT_GE(c.table[4], 10);
      EXPECT_LE(c.table[4], 15);
    }
    if (c.kind == ConstraintKind::AtLeast) {
      ++at_least;
      least_scopes.insert(c.scope.bits());
      EXPECT_EQ(c.table[0], kDefaultProhibitive);
      EXPECT_GE(c.table[1], 1);
      EXPECT_LE(c.table[1], 3);
    }
  }
  EXPECT_EQ(sod, 20);  // round(0.3 * 66)
  EXPECT_EQ(at_most, 12);
  EXPECT_EQ(at_least, 12);
  EXPECT_EQ(most_scopes.size(), 12U);
  EXPECT_EQ(least_scopes.size(), 12U);
  for (const auto& u : s.users) {
    if (const auto* st = std::get_if<StaffProfile>(&u.profile)) {
      EXPECT_LE(st->authorized.size(), 10);
      EXPECT_EQ(st->fallback.size(), 2);
      EXPECT_FALSE(st->fallback.intersects(st->authorized));
      EXPECT_GE(st->sigma, 5);
      EXPECT_LE(st->sigma, 15);
    } else {
      const auto& c = std::get<ConsultantProfile>(u.profile);
      EXPECT_GE(c.sigma, 10);
      EXPECT_LE(c.sigma, 30);
    }
  }
}

TEST(Generator, ScaledParamsStaySmall) {
  for (int k = 2; k <= 5; ++k) {
    const Schema s = generate(scaled_params(k, 1.0, 0.3, 11));
    EXPECT_LE(s.user_count(), 12);
    EXPECT_EQ(s.step_count, k);
  }
}

TEST(Generator, ParameterValidation) {
  auto code = [](GenParams p) {
    try {
      (void)generate(p);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  GenParams p;
  p.k = 1;
  EXPECT_EQ(code(p), "bad-argument");
  p.k = 6;
  p.e = 1.5;
  EXPECT_EQ(code(p), "bad-argument");
  p.e = 0.3;
  p.at_most_count = 10;  // only C(6,5) = 6 distinct scopes exist
  EXPECT_EQ(code(p), "scope-exhaustion");
}

TEST(WorstCase, Shape) {
  for (int k = 1; k <= 5; ++k) {
    const Schema s = worst_case_family(k);
    EXPECT_EQ(s.user_count(), 1 << k);
    EXPECT_EQ(static_cast<int>(s.constraints.size()), pair_count(k));
    EXPECT_EQ(s.bounds.auth, worst_case_total(k));
  }
  EXPECT_EQ(worst_case_total(3), 14);
  EXPECT_EQ(worst_case_family(2).users[3].name, "u{s1,s2}");
}

TEST(WorstCase, EveryPartitionIsAFrontPoint) {
  // each partition Q, realised by assigning block T to u_T, weighs
  // (sum of pairs inside blocks, sum of pairs cut) with total fixed
  const int k = 4;
  const Schema s = worst_case_family(k);
  std::set<WeightPoint> expect;
  for (const auto& p : enumerate_patterns(k)) {
    std::vector<int> plan(k);
    for (auto b : p.blocks)
      for (int st : b.elements()) plan[static_cast<std::size_t>(st)] = static_cast<int>(b.bits());
    const auto w = oracle::weights(s, plan);
    EXPECT_EQ(w.auth + w.cons, worst_case_total(k));
    expect.insert(w);
  }
  EXPECT_EQ(expect.size(), oracle::kBell[4]);
  const auto front = oracle::front(s);
  EXPECT_EQ(std::vector<WeightPoint>(expect.begin(), expect.end()), front);
}

TEST(Fixtures, PurchaseOrder) {
  const Schema s = purchase_order_fixture();
  EXPECT_EQ(s.step_count, 6);
  EXPECT_EQ(s.user_count(), 8);
  EXPECT_EQ(s.constraints.size(), 3U);
  // u6 is the only user for s2
  for (int u = 0; u < 8; ++u) EXPECT_EQ(s.set_weight(StepSet::single(1), u) == 0, u == 5);
  const Schema bad = purchase_order_unsatisfiable();
  EXPECT_EQ(bad.user_count(), 6);
  EXPECT_EQ(bad.constraints.size(), 4U);
  EXPECT_EQ(bad.users[5].name, "u8");
}
