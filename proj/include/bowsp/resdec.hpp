#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <map>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "pbb.hpp"
#include "schema.hpp"

namespace bowsp {

/// Users as a bit mask (user u is bit u); resiliency checks need n <= 64.
using UserMask = std::uint64_t;

enum class Flavor { Static, Decremental, Dynamic };

/// U_i for each position i of a linear extension.
struct UsersetFamily {
  std::vector<UserMask> sets;
  bool operator==(const UsersetFamily&) const = default;
};

/// Plain WSP reading of a weighted schema: u is authorized for s when
/// omega({s}, u) = 0, and a plan is valid when every step goes to an
/// authorized user and every constraint weighs 0.
class WspView {
 public:
  explicit WspView(const Schema& schema) : schema_(schema), k_(schema.step_count), n_(schema.user_count()) {
    if (n_ > 64) throw Error("too-many-users", "resiliency checks support at most 64 users");
    auth_.assign(static_cast<std::size_t>(k_), 0);
    for (int s = 0; s < k_; ++s)
      for (int u = 0; u < n_; ++u)
        if (schema.set_weight(StepSet::single(s), u) == 0) auth_[static_cast<std::size_t>(s)] |= UserMask{1} << u;
    for (int s = 0; s < k_; ++s) step_constraints_.emplace_back();
    for (std::size_t i = 0; i < schema.constraints.size(); ++i)
      schema.constraints[i].scope.for_each([&](int s) { step_constraints_[static_cast<std::size_t>(s)].push_back(static_cast<int>(i)); });
  }

  [[nodiscard]] const Schema& schema() const { return schema_; }
  [[nodiscard]] int steps() const { return k_; }
  [[nodiscard]] int users() const { return n_; }
  [[nodiscard]] UserMask all_users() const { return n_ == 64 ? ~UserMask{0} : (UserMask{1} << n_) - 1; }
  [[nodiscard]] UserMask authorized(int s) const { return auth_[static_cast<std::size_t>(s)]; }

  /// Is there a valid plan with plan[s] in allowed[s] for every step?
  [[nodiscard]] bool valid_plan_exists(const std::vector<UserMask>& allowed) const {
    std::vector<int> order(static_cast<std::size_t>(k_));
    for (int s = 0; s < k_; ++s) {
      order[static_cast<std::size_t>(s)] = s;
      if ((allowed[static_cast<std::size_t>(s)] & authorized(s)) == 0) return false;
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const int ca = std::popcount(allowed[static_cast<std::size_t>(a)] & authorized(a));
      const int cb = std::popcount(allowed[static_cast<std::size_t>(b)] & authorized(b));
      return ca != cb ? ca < cb : a < b;
    });
    std::vector<int> plan(static_cast<std::size_t>(k_), kUnassigned);
    return extend(order, 0, allowed, plan);
  }

  /// Does the (complete) plan satisfy every constraint and authorization?
  [[nodiscard]] bool valid(const std::vector<int>& plan) const {
    for (int s = 0; s < k_; ++s)
      if (((authorized(s) >> plan[static_cast<std::size_t>(s)]) & 1U) == 0) return false;
    return constraint_weight(schema_, Pattern::of(plan)) == 0;
  }

 private:
  bool extend(const std::vector<int>& order, std::size_t depth, const std::vector<UserMask>& allowed,
              std::vector<int>& plan) const {
    if (depth == order.size()) return true;
    const int s = order[depth];
    UserMask options = allowed[static_cast<std::size_t>(s)] & authorized(s);
    while (options != 0) {
      const int u = std::countr_zero(options);
      options &= options - 1;
      plan[static_cast<std::size_t>(s)] = u;
      if (consistent(s, plan) && extend(order, depth + 1, allowed, plan)) return true;
    }
    plan[static_cast<std::size_t>(s)] = kUnassigned;
    return false;
  }

  /// Every constraint on s can still reach a zero-weight user count.
  bool consistent(int s, const std::vector<int>& plan) const {
    for (int ci : step_constraints_[static_cast<std::size_t>(s)]) {
      const auto& c = schema_.constraints[static_cast<std::size_t>(ci)];
      UserMask used = 0;
      int open = 0;
      c.scope.for_each([&](int t) {
        const int u = plan[static_cast<std::size_t>(t)];
        if (u == kUnassigned)
          ++open;
        else
          used |= UserMask{1} << u;
      });
      if (lower_bound_from_counts(c, std::popcount(used), open) != 0) return false;
    }
    return true;
  }

  const Schema& schema_;
  int k_;
  int n_;
  std::vector<UserMask> auth_;
  std::vector<std::vector<int>> step_constraints_;
};

/// Every total order of the steps consistent with the schema's order, in
/// lexicographic order.
inline std::vector<std::vector<int>> linear_extensions(const Schema& schema) {
  std::vector<std::vector<int>> out;
  std::vector<int> prefix;
  const int k = schema.step_count;
  auto rec = [&](auto&& self, StepSet placed) -> void {
    if (static_cast<int>(prefix.size()) == k) {
      out.push_back(prefix);
      return;
    }
    for (int s = 0; s < k; ++s) {
      if (placed.contains(s) || !schema.predecessors[static_cast<std::size_t>(s)].subset_of(placed)) continue;
      prefix.push_back(s);
      self(self, placed | StepSet::single(s));
      prefix.pop_back();
    }
  };
  rec(rec, StepSet());
  return out;
}

namespace detail {

/// Distinct per-step allowed-user vectors, one per linear extension.
inline std::vector<std::vector<UserMask>> allowed_vectors(const std::vector<std::vector<int>>& extensions,
                                                          const UsersetFamily& family) {
  std::set<std::vector<UserMask>> seen;
  for (const auto& ext : extensions) {
    std::vector<UserMask> allowed(ext.size());
    for (std::size_t i = 0; i < ext.size(); ++i) allowed[static_cast<std::size_t>(ext[i])] = family.sets[i];
    seen.insert(std::move(allowed));
  }
  return {seen.begin(), seen.end()};
}

}  // namespace detail

/// Some linear extension and valid plan with pi(s_i) in U_i at every
/// position i.
inline bool compatible_valid_plan_exists(const WspView& view, const std::vector<std::vector<int>>& extensions,
                                         const UsersetFamily& family) {
  for (const auto& allowed : detail::allowed_vectors(extensions, family))
    if (view.valid_plan_exists(allowed)) return true;
  return false;
}

inline bool compatible_valid_plan_exists(const Schema& schema, const UsersetFamily& family) {
  const WspView view(schema);
  return compatible_valid_plan_exists(view, linear_extensions(schema), family);
}

// ---------------------------------------------------------------------------
// Marking

/// Users kept by the marking step: for every non-empty step set T, all of
/// N(T) (users authorized for every step of T) if |N(T)| < k + t, otherwise
/// its k + t lowest-indexed members. Every block of every partition is such
/// a T, so ranging over subsets covers all partitions.
inline UserMask marked_userset(const Schema& schema, int t) {
  const WspView view(schema);
  const int k = view.steps();
  if (k > 24) throw Error("resiliency-too-large", "marking enumerates 2^k step sets");
  const int limit = k + t;
  UserMask marked = 0;
  const std::uint64_t sets = std::uint64_t{1} << k;
  for (std::uint64_t bits = 1; bits < sets; ++bits) {
    UserMask common = view.all_users();
    StepSet(bits).for_each([&](int s) { common &= view.authorized(s); });
    if (std::popcount(common) < limit) {
      marked |= common;
    } else {
      for (int i = 0; i < limit; ++i) {
        const UserMask low = common & (~common + 1);
        marked |= low;
        common &= common - 1;
      }
    }
  }
  return marked;
}

inline std::vector<int> mask_users(UserMask mask) {
  std::vector<int> out;
  for (UserMask m = mask; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

// ---------------------------------------------------------------------------
// Deciding resiliency

inline constexpr std::uint64_t kDefaultResiliencyBudget = 10'000'000;

struct ResilienceOptions {
  std::uint64_t budget = kDefaultResiliencyBudget;
  int threads = 1;
  bool use_marking = true;
};

struct ResilienceResult {
  bool resilient = true;
  /// Over the users in `universe`, given by original indices.
  std::optional<UsersetFamily> counterexample;
  UserMask universe = 0;
  std::uint64_t families_checked = 0;
};

namespace detail {

inline std::uint64_t binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  std::uint64_t out = 1;
  for (int i = 1; i <= r; ++i) out = out * static_cast<std::uint64_t>(n - r + i) / static_cast<std::uint64_t>(i);
  return out;
}

/// All r-subsets of the first n users, lexicographic by member list.
inline std::vector<UserMask> subsets_of_size(int n, int r) {
  std::vector<UserMask> out;
  std::vector<int> pick(static_cast<std::size_t>(r));
  auto rec = [&](auto&& self, int start, int depth, UserMask acc) -> void {
    if (depth == r) {
      out.push_back(acc);
      return;
    }
    for (int u = start; u <= n - (r - depth); ++u) self(self, u + 1, depth + 1, acc | (UserMask{1} << u));
  };
  rec(rec, 0, 0, 0);
  return out;
}

/// Expresses a family over the reduced users with original indices.
inline UsersetFamily lift(const UsersetFamily& f, const std::vector<int>& original) {
  UsersetFamily out;
  for (UserMask m : f.sets) {
    UserMask lifted = 0;
    for (UserMask b = m; b != 0; b &= b - 1) lifted |= UserMask{1} << original[static_cast<std::size_t>(std::countr_zero(b))];
    out.sets.push_back(lifted);
  }
  return out;
}

/// Static check: removal sets of size min(t, n), one representative per
/// multiset of authorization-identical user classes.
inline ResilienceResult decide_static(const WspView& view, int t, std::uint64_t budget) {
  const int n = view.users();
  const int r = std::min(t, n);
  // classes of users with identical authorization columns
  std::map<std::vector<int>, std::vector<int>> by_column;
  for (int u = 0; u < n; ++u) {
    std::vector<int> column;
    for (int s = 0; s < view.steps(); ++s) column.push_back(static_cast<int>((view.authorized(s) >> u) & 1U));
    by_column[column].push_back(u);
  }
  std::vector<std::vector<int>> classes;
  for (auto& [col, members] : by_column) classes.push_back(members);

  ResilienceResult out;
  out.universe = view.all_users();
  std::vector<int> take(classes.size(), 0);
  bool stop = false;
  auto rec = [&](auto&& self, std::size_t c, int left) -> void {
    if (stop) return;
    if (c == classes.size()) {
      if (left != 0) return;
      if (++out.families_checked > budget) throw Error("resiliency-too-large", "static family count exceeds budget " + std::to_string(budget));
      UserMask removed = 0;
      for (std::size_t i = 0; i < classes.size(); ++i)
        for (int j = 0; j < take[i]; ++j) removed |= UserMask{1} << classes[i][static_cast<std::size_t>(j)];
      const UserMask kept = view.all_users() & ~removed;
      if (!view.valid_plan_exists(std::vector<UserMask>(static_cast<std::size_t>(view.steps()), kept))) {
        out.resilient = false;
        out.counterexample = UsersetFamily{std::vector<UserMask>(static_cast<std::size_t>(view.steps()), kept)};
        stop = true;
      }
      return;
    }
    const int most = std::min(left, static_cast<int>(classes[c].size()));
    for (int j = 0; j <= most && !stop; ++j) {
      take[c] = j;
      self(self, c + 1, left - j);
    }
    take[c] = 0;
  };
  rec(rec, 0, r);
  return out;
}

/// Dynamic check: every tuple of per-position removal sets of size
/// min(t, n); the lowest-index failing tuple is reported.
inline ResilienceResult decide_dynamic(const WspView& view, int t, std::uint64_t budget, int threads) {
  const int n = view.users();
  const int k = view.steps();
  const int r = std::min(t, n);
  const auto removals = subsets_of_size(n, r);
  std::uint64_t total = 1;
  for (int i = 0; i < k; ++i) {
    if (total > budget / std::max<std::uint64_t>(1, removals.size()))
      throw Error("resiliency-too-large", "dynamic family count C(" + std::to_string(n) + "," + std::to_string(r) + ")^" +
                                              std::to_string(k) + " exceeds budget " + std::to_string(budget));
    total *= removals.size();
  }
  const auto extensions = linear_extensions(view.schema());

  std::atomic<std::uint64_t> first_fail{total};
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> checked{0};
  constexpr std::uint64_t kChunk = 256;

  auto family_at = [&](std::uint64_t index) {
    UsersetFamily f;
    f.sets.assign(static_cast<std::size_t>(k), 0);
    for (int i = k - 1; i >= 0; --i) {
      f.sets[static_cast<std::size_t>(i)] = view.all_users() & ~removals[static_cast<std::size_t>(index % removals.size())];
      index /= removals.size();
    }
    return f;
  };
  auto worker = [&] {
    while (true) {
      const std::uint64_t begin = next.fetch_add(kChunk);
      if (begin >= total || begin >= first_fail.load()) return;
      const std::uint64_t end = std::min(total, begin + kChunk);
      for (std::uint64_t i = begin; i < end && i < first_fail.load(); ++i) {
        checked.fetch_add(1, std::memory_order_relaxed);
        if (!compatible_valid_plan_exists(view, extensions, family_at(i))) {
          std::uint64_t cur = first_fail.load();
          while (i < cur && !first_fail.compare_exchange_weak(cur, i)) {
          }
          break;
        }
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ResilienceResult out;
  out.universe = view.all_users();
  out.families_checked = checked.load();
  if (first_fail.load() < total) {
    out.resilient = false;
    out.counterexample = family_at(first_fail.load());
  }
  return out;
}

}  // namespace detail

/// Static: every removal of at most t users leaves a valid plan.
/// Decremental: every non-increasing t-close family admits a compatible
/// plan; the family repeating its last (smallest) set is the hardest one,
/// and it is static, so this agrees with the static answer.
/// Dynamic: every t-close family admits a compatible plan.
inline ResilienceResult decide_resilient(const Schema& schema, int t, Flavor flavor, const ResilienceOptions& opt = {}) {
  if (t < 0) throw Error("bad-argument", "t must be non-negative");
  std::vector<int> users(static_cast<std::size_t>(schema.user_count()));
  for (int u = 0; u < schema.user_count(); ++u) users[static_cast<std::size_t>(u)] = u;
  Schema reduced = schema;
  if (opt.use_marking) {
    users = mask_users(marked_userset(schema, t));
    if (users.empty()) users.push_back(0);
    reduced = select_users(schema, users);
  }
  const WspView view(reduced);
  ResilienceResult out = flavor == Flavor::Dynamic ? detail::decide_dynamic(view, t, opt.budget, opt.threads)
                                                   : detail::decide_static(view, t, opt.budget);
  if (out.counterexample) out.counterexample = detail::lift(*out.counterexample, users);
  UserMask universe = 0;
  for (int u : users) universe |= UserMask{1} << u;
  out.universe = universe;
  return out;
}

}  // namespace bowsp
