#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace bowsp;

namespace {

BlockUserCostMatrix random_matrix(std::mt19937_64& rng, int p, int n, int hi) {
  BlockUserCostMatrix m(p, n);
  std::uniform_int_distribution<int> w(0, hi);
  for (auto& c : m.cost) c = w(rng);
  return m;
}

std::vector<std::vector<Weight>> rows_of(const BlockUserCostMatrix& m) {
  std::vector<std::vector<Weight>> out(static_cast<std::size_t>(m.rows));
  for (int q = 0; q < m.rows; ++q)
    for (int u = 0; u < m.cols; ++u) out[static_cast<std::size_t>(q)].push_back(m.at(q, u));
  return out;
}

/// Lexicographically smallest optimal user vector by exhaustive search.
std::vector<int> brute_lexmin(const BlockUserCostMatrix& m, Weight optimum) {
  std::vector<int> cur;
  std::vector<bool> used(static_cast<std::size_t>(m.cols), false);
  std::vector<int> found;
  std::function<bool(int, Weight)> rec = [&](int q, Weight acc) {
    if (q == m.rows) {
      if (acc != optimum) return false;
      found = cur;
      return true;
    }
    for (int u = 0; u < m.cols; ++u) {
      if (used[static_cast<std::size_t>(u)]) continue;
      used[static_cast<std::size_t>(u)] = true;
      cur.push_back(u);
      if (rec(q + 1, acc + m.at(q, u))) return true;
      cur.pop_back();
      used[static_cast<std::size_t>(u)] = false;
    }
    return false;
  };
  rec(0, 0);
  return found;
}

}  // namespace

TEST(Matching, AgreesWithBruteForceOnRandomMatrices) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 10)(rng);
    const int p = std::uniform_int_distribution<int>(0, std::min(6, n))(rng);
    const int hi = trial % 3 == 0 ? 3 : 1000;  // small ranges force ties
    const auto m = random_matrix(rng, p, n, hi);
    const Weight expect = oracle::brute_assignment(rows_of(m));
    ASSERT_EQ(min_assignment_value(m), expect) << "trial " << trial;
    const auto a = min_weight_block_assignment(m);
    ASSERT_EQ(a.total, expect);
    Weight sum = 0;
    for (int q = 0; q < p; ++q) sum += m.at(q, a.users[static_cast<std::size_t>(q)]);
    ASSERT_EQ(sum, expect);
    ASSERT_EQ(std::set<int>(a.users.begin(), a.users.end()).size(), a.users.size());
  }
}

TEST(Matching, TieBreakIsLexicographicallySmallest) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 7)(rng);
    const int p = std::uniform_int_distribution<int>(1, std::min(5, n))(rng);
    const auto m = random_matrix(rng, p, n, 2);
    const auto a = min_weight_block_assignment(m);
    ASSERT_EQ(a.users, brute_lexmin(m, a.total)) << "trial " << trial;
  }
}

TEST(Matching, EdgeShapes) {
  EXPECT_EQ(min_assignment_value(BlockUserCostMatrix(0, 4)), 0);
  EXPECT_TRUE(min_weight_block_assignment(BlockUserCostMatrix(0, 4)).users.empty());
  try {
    (void)min_assignment_value(BlockUserCostMatrix(3, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "more-blocks-than-users");
  }
  BlockUserCostMatrix big(2, 2);
  big.at(0, 0) = 1'000'000'000'000;
  big.at(0, 1) = 1'000'000'000'000;
  big.at(1, 0) = 3;
  big.at(1, 1) = 1'000'000'000'000;
  EXPECT_EQ(min_assignment_value(big), 1'000'000'000'003);
}

TEST(Matching, CostMatrixFromSchema) {
  const Schema s = purchase_order_fixture();
  const auto m = BlockUserCostMatrix::of(s, {StepSet::of({0, 2, 3}), StepSet::of({1})});
  EXPECT_EQ(m.at(0, 0), 0);
  EXPECT_EQ(m.at(1, 5), 0);
  EXPECT_EQ(m.at(1, 0), kDefaultProhibitive);
  EXPECT_EQ(min_assignment_value(m), 0);
}
