#pragma once

// Brute-force reference implementations used by the tests. They share only
// the input types with the library and recompute everything from the
// definitions.

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <bowsp/bowsp.hpp>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using bowsp::Schema;
using bowsp::StepSet;
using bowsp::Weight;
using bowsp::WeightPoint;

inline constexpr Weight kInf = std::numeric_limits<Weight>::max();

inline void for_each_plan(int k, int n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> plan(static_cast<std::size_t>(k), 0);
  while (true) {
    fn(plan);
    int i = k - 1;
    while (i >= 0 && ++plan[static_cast<std::size_t>(i)] == n) plan[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) return;
  }
}

inline Weight constraint_weight(const Schema& s, const std::vector<int>& plan) {
  Weight total = 0;
  for (const auto& c : s.constraints) {
    std::set<int> users;
    for (int st = 0; st < s.step_count; ++st)
      if ((c.scope.bits() >> st) & 1U) users.insert(plan[static_cast<std::size_t>(st)]);
    total += c.table[users.size() - 1];
  }
  return total;
}

inline Weight auth_weight(const Schema& s, const std::vector<int>& plan) {
  std::map<int, std::uint64_t> steps;
  for (int st = 0; st < s.step_count; ++st) steps[plan[static_cast<std::size_t>(st)]] |= std::uint64_t{1} << st;
  Weight total = 0;
  for (auto [u, bits] : steps) total += s.set_weight(StepSet(bits), u);
  return total;
}

inline WeightPoint weights(const Schema& s, const std::vector<int>& plan) {
  return {oracle::constraint_weight(s, plan), oracle::auth_weight(s, plan)};
}

/// Non-dominated, pairwise distinct weight points of all plans inside the
/// bounds, sorted by omega_C.
inline std::vector<WeightPoint> front(const Schema& s) {
  std::set<WeightPoint> all;
  for_each_plan(s.step_count, s.user_count(), [&](const std::vector<int>& plan) {
    const auto w = weights(s, plan);
    if (w.auth <= s.bounds.auth && w.cons <= s.bounds.cons) all.insert(w);
  });
  std::vector<WeightPoint> out;
  for (const auto& p : all) {
    bool dominated = false;
    for (const auto& q : all)
      if (!(q == p) && q.auth <= p.auth && q.cons <= p.cons) dominated = true;
    if (!dominated) out.push_back(p);
  }
  return out;
}

inline std::vector<WeightPoint> points_of(const bowsp::ParetoFront& f) { return f.weight_points(); }

/// Restricted growth string of a plan restricted to the steps in T, as a
/// vector with -1 outside T.
inline std::vector<int> rgs(const std::vector<int>& plan, std::uint64_t t) {
  std::vector<int> out(plan.size(), -1);
  std::vector<int> seen;
  for (std::size_t st = 0; st < plan.size(); ++st) {
    if (((t >> st) & 1U) == 0) continue;
    auto it = std::find(seen.begin(), seen.end(), plan[st]);
    if (it == seen.end()) {
      seen.push_back(plan[st]);
      out[st] = static_cast<int>(seen.size()) - 1;
    } else {
      out[st] = static_cast<int>(it - seen.begin());
    }
  }
  return out;
}

inline std::vector<int> rgs(const bowsp::Pattern& p, int k) {
  std::vector<int> labels(static_cast<std::size_t>(k), -1);
  for (std::size_t b = 0; b < p.blocks.size(); ++b)
    for (int st = 0; st < k; ++st)
      if ((p.blocks[b].bits() >> st) & 1U) labels[static_cast<std::size_t>(st)] = static_cast<int>(b);
  // relabel by first appearance
  std::vector<int> map;
  for (auto& l : labels) {
    if (l < 0) continue;
    auto it = std::find(map.begin(), map.end(), l);
    if (it == map.end()) {
      map.push_back(l);
      l = static_cast<int>(map.size()) - 1;
    } else {
      l = static_cast<int>(it - map.begin());
    }
  }
  return labels;
}

/// For every full pattern (as a restricted growth string) the least
/// omega_A and omega_C over plans with that pattern.
struct CompletionTable {
  std::map<std::vector<int>, WeightPoint> best;
  int k = 0;

  explicit CompletionTable(const Schema& s) : k(s.step_count) {
    const std::uint64_t all = (std::uint64_t{1} << k) - 1;
    for_each_plan(k, s.user_count(), [&](const std::vector<int>& plan) {
      const auto w = weights(s, plan);
      auto [it, fresh] = best.try_emplace(rgs(plan, all), w);
      if (!fresh) {
        it->second.auth = std::min(it->second.auth, w.auth);
        it->second.cons = std::min(it->second.cons, w.cons);
      }
    });
  }

  /// Least (omega_A, omega_C) over complete plans whose restriction to the
  /// pattern's steps has that pattern; kInf when there are none.
  [[nodiscard]] WeightPoint min_completion(const bowsp::Pattern& p) const {
    const auto target = rgs(p, k);
    std::uint64_t t = 0;
    for (int st = 0; st < k; ++st)
      if (target[static_cast<std::size_t>(st)] >= 0) t |= std::uint64_t{1} << st;
    WeightPoint out{kInf, kInf};
    for (const auto& [full, w] : best) {
      if (rgs(full, t) != target) continue;
      out.auth = std::min(out.auth, w.auth);
      out.cons = std::min(out.cons, w.cons);
    }
    return out;
  }
};

/// Least cost of an injective row -> column assignment.
inline Weight brute_assignment(const std::vector<std::vector<Weight>>& cost) {
  const std::size_t p = cost.size();
  if (p == 0) return 0;
  const std::size_t n = cost[0].size();
  Weight best = kInf;
  std::vector<bool> used(n, false);
  std::function<void(std::size_t, Weight)> rec = [&](std::size_t row, Weight acc) {
    if (acc >= best) return;
    if (row == p) {
      best = acc;
      return;
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (used[c]) continue;
      used[c] = true;
      rec(row + 1, acc + cost[row][c]);
      used[c] = false;
    }
  };
  rec(0, 0);
  return best;
}

/// Bell numbers B_0..B_10.
inline const std::vector<std::uint64_t> kBell = {1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975};

/// Random desk-scale instance mixing every authorization form and
/// constraint kind.
inline Schema random_schema(std::mt19937_64& rng, int k, int n, int auth_kind) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Schema s;
  s.step_count = k;
  std::vector<std::pair<int, int>> order;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (pick(0, 5) == 0) order.emplace_back(a, b);
  s.predecessors = bowsp::close_order(k, order);
  for (int u = 0; u < n; ++u) s.users.push_back({"u" + std::to_string(u + 1), bowsp::PlainProfile{}});
  const int sets = 1 << k;
  switch (auth_kind % 3) {
    case 0: {
      auto w = bowsp::per_step_matrix(k, n, 0);
      for (auto& x : w.weights) x = pick(0, 3) == 0 ? 20 : pick(0, 6);
      s.auth = w;
      break;
    }
    case 1: {
      bowsp::ExplicitTableAuth t;
      t.default_weight = pick(5, 40);
      for (int u = 0; u < n; ++u)
        for (int b = 1; b < sets; ++b)
          if (pick(0, 2) == 0) t.set(u, StepSet(static_cast<std::uint64_t>(b)), pick(0, 30));
      s.auth = t;
      break;
    }
    default: {
      for (int u = 0; u < n; ++u) {
        if (pick(0, 3) == 0) {
          s.users[static_cast<std::size_t>(u)].profile =
              bowsp::ConsultantProfile{StepSet(static_cast<std::uint64_t>(pick(0, sets - 1))), pick(1, 9)};
        } else {
          const StepSet a(static_cast<std::uint64_t>(pick(0, sets - 1)));
          const StepSet f = StepSet(static_cast<std::uint64_t>(pick(0, sets - 1))) - a;
          s.users[static_cast<std::size_t>(u)].profile = bowsp::StaffProfile{a, f, pick(1, 6)};
        }
      }
      s.auth = bowsp::ProfileAuth{50};
      break;
    }
  }
  const int cons = pick(1, 4);
  for (int i = 0; i < cons; ++i) {
    const int kind = pick(0, 4);
    if (kind <= 1 && k >= 2) {
      int a = pick(0, k - 1);
      int b = pick(0, k - 2);
      if (b >= a) ++b;
      s.constraints.push_back(kind == 0 ? bowsp::WeightedConstraint::separation_of_duty(a, b, pick(1, 25))
                                        : bowsp::WeightedConstraint::binding_of_duty(a, b, pick(1, 25)));
      continue;
    }
    StepSet scope(static_cast<std::uint64_t>(pick(1, sets - 1)));
    const int size = scope.size();
    std::vector<Weight> table(static_cast<std::size_t>(size));
    if (kind == 2) {
      const int r = pick(1, size);
      for (int m = 1; m <= size; ++m) table[static_cast<std::size_t>(m - 1)] = m > r ? pick(1, 12) * (m - r) : 0;
      s.constraints.push_back(bowsp::WeightedConstraint::at_most(scope, r, table));
    } else if (kind == 3) {
      const int r = pick(1, size);
      for (int m = 1; m <= size; ++m) table[static_cast<std::size_t>(m - 1)] = m < r ? pick(1, 12) * (r - m) : 0;
      s.constraints.push_back(bowsp::WeightedConstraint::at_least(scope, r, table));
    } else {
      for (auto& x : table) x = pick(0, 15);
      s.constraints.push_back(bowsp::WeightedConstraint::power_table(scope, table));
    }
  }
  s.bounds = {pick(0, 3) == 0 ? 25 : 1000, pick(0, 3) == 0 ? 20 : 1000};
  bowsp::validate_schema(s);
  return s;
}

/// Direct check of a WSP-valid plan: authorized means omega({s}, u) = 0.
inline bool wsp_valid(const Schema& s, const std::vector<int>& plan) {
  for (int st = 0; st < s.step_count; ++st)
    if (s.set_weight(StepSet::single(st), plan[static_cast<std::size_t>(st)]) != 0) return false;
  return oracle::constraint_weight(s, plan) == 0;
}

/// Plain WSP instance: random authorizations (weight 0 or 1) and a few
/// hard constraints of every kind.
inline Schema random_wsp(std::mt19937_64& rng, int k, int n, double density) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Schema s;
  s.step_count = k;
  std::vector<std::pair<int, int>> order;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (pick(0, 3) == 0) order.emplace_back(a, b);
  s.predecessors = bowsp::close_order(k, order);
  auto w = bowsp::per_step_matrix(k, n, 1);
  std::bernoulli_distribution authorized(density);
  for (auto& x : w.weights) x = authorized(rng) ? 0 : 1;
  s.auth = w;
  for (int u = 0; u < n; ++u) s.users.push_back({"u" + std::to_string(u + 1), bowsp::PlainProfile{}});
  const int cons = pick(0, 3);
  for (int i = 0; i < cons && k >= 2; ++i) {
    int a = pick(0, k - 1);
    int b = pick(0, k - 2);
    if (b >= a) ++b;
    switch (pick(0, 3)) {
      case 0: s.constraints.push_back(bowsp::WeightedConstraint::separation_of_duty(a, b, 1)); break;
      case 1: s.constraints.push_back(bowsp::WeightedConstraint::binding_of_duty(a, b, 1)); break;
      case 2: s.constraints.push_back(bowsp::all_steps_at_most(k, pick(1, k))); break;
      default: {
        const int r = pick(1, k);
        std::vector<Weight> t(static_cast<std::size_t>(k), 0);
        for (int m = 1; m < r; ++m) t[static_cast<std::size_t>(m - 1)] = 1;
        s.constraints.push_back(bowsp::WeightedConstraint::at_least(StepSet::first_n(k), r, t));
      }
    }
  }
  bowsp::validate_schema(s);
  return s;
}

}  // namespace oracle
