#pragma once

#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pareto.hpp"
#include "pbb.hpp"
#include "schema.hpp"

namespace bowsp {

/// Minimize omega_A (alpha = 0) or omega_C (alpha = 1) subject to
/// auth_lo <= omega_A <= auth_hi and cons_lo <= omega_C <= cons_hi.
struct BoundedMinimizeQuery {
  int alpha = 0;
  Weight auth_lo = 0;
  Weight auth_hi = 0;
  Weight cons_lo = 0;
  Weight cons_hi = 0;

  [[nodiscard]] bool empty() const { return auth_lo > auth_hi || cons_lo > cons_hi; }
  [[nodiscard]] bool contains(WeightPoint w) const {
    return w.auth >= auth_lo && w.auth <= auth_hi && w.cons >= cons_lo && w.cons <= cons_hi;
  }
  [[nodiscard]] Weight objective(WeightPoint w) const { return alpha == 0 ? w.auth : w.cons; }
  [[nodiscard]] std::string describe() const {
    return "alpha=" + std::to_string(alpha) + " A in [" + std::to_string(auth_lo) + "," + std::to_string(auth_hi) +
           "] C in [" + std::to_string(cons_lo) + "," + std::to_string(cons_hi) + "]";
  }
};

struct BoundedResult {
  std::vector<int> plan;
  WeightPoint weights;
};

class BoundedMinimizer {
 public:
  virtual ~BoundedMinimizer() = default;
  /// A plan inside the box minimizing the objective, or nothing if the box
  /// holds no plan.
  virtual std::optional<BoundedResult> solve(const Schema& schema, const BoundedMinimizeQuery& query) = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

inline constexpr std::uint64_t kDefaultOracleBudget = 100'000'000;

/// n^k, or budget + 1 once it exceeds the budget.
inline std::uint64_t plan_count(int k, int n, std::uint64_t budget) {
  std::uint64_t total = 1;
  for (int i = 0; i < k; ++i) {
    if (total > budget / static_cast<std::uint64_t>(n)) return budget + 1;
    total *= static_cast<std::uint64_t>(n);
  }
  return total;
}

namespace detail {

/// Evaluates complete plans with reusable buffers.
class PlanEvaluator {
 public:
  explicit PlanEvaluator(const Schema& schema)
      : schema_(schema), masks_(static_cast<std::size_t>(schema.user_count())), seen_(static_cast<std::size_t>(schema.user_count()), 0) {}

  WeightPoint operator()(const std::vector<int>& plan) {
    touched_.clear();
    for (int s = 0; s < schema_.step_count; ++s) {
      const auto u = static_cast<std::size_t>(plan[static_cast<std::size_t>(s)]);
      if (masks_[u].empty()) touched_.push_back(static_cast<int>(u));
      masks_[u].insert(s);
    }
    WeightPoint w;
    for (int u : touched_) {
      w.auth = add_weights(w.auth, schema_.set_weight(masks_[static_cast<std::size_t>(u)], u));
      masks_[static_cast<std::size_t>(u)] = StepSet();
    }
    for (const auto& c : schema_.constraints) {
      int distinct = 0;
      ++stamp_;
      c.scope.for_each([&](int s) {
        auto& mark = seen_[static_cast<std::size_t>(plan[static_cast<std::size_t>(s)])];
        if (mark != stamp_) {
          mark = stamp_;
          ++distinct;
        }
      });
      w.cons = add_weights(w.cons, c.penalty(distinct));
    }
    return w;
  }

 private:
  const Schema& schema_;
  std::vector<StepSet> masks_;
  std::vector<int> touched_;
  std::vector<std::uint32_t> seen_;
  std::uint32_t stamp_ = 0;
};

/// Visits every complete plan in lexicographic order (step 1 most
/// significant).
template <typename F>
void for_each_plan(int k, int n, F&& f) {
  std::vector<int> plan(static_cast<std::size_t>(k), 0);
  while (true) {
    f(static_cast<const std::vector<int>&>(plan));
    int s = k - 1;
    while (s >= 0 && plan[static_cast<std::size_t>(s)] == n - 1) plan[static_cast<std::size_t>(s--)] = 0;
    if (s < 0) return;
    ++plan[static_cast<std::size_t>(s)];
  }
}

inline void check_oracle_budget(const Schema& schema, std::uint64_t budget) {
  if (plan_count(schema.step_count, schema.user_count(), budget) > budget)
    throw Error("oracle-too-large", "n^k exceeds the plan budget of " + std::to_string(budget));
}

}  // namespace detail

/// Ground truth: offers every complete plan to a fresh front.
inline ParetoFront oracle_front(const Schema& schema, std::uint64_t budget = kDefaultOracleBudget) {
  detail::check_oracle_budget(schema, budget);
  ParetoFront front(schema.bounds);
  detail::PlanEvaluator eval(schema);
  detail::for_each_plan(schema.step_count, schema.user_count(), [&](const std::vector<int>& plan) {
    const auto w = eval(plan);
    if (front.accepts(w)) front.offer(w, plan);
  });
  return front;
}

/// Exhaustive minimizer over all n^k plans; ties go to the lexicographically
/// smallest plan. Plan weights are computed once per schema.
class OracleBackend final : public BoundedMinimizer {
 public:
  explicit OracleBackend(std::uint64_t budget = kDefaultOracleBudget) : budget_(budget) {}

  std::optional<BoundedResult> solve(const Schema& schema, const BoundedMinimizeQuery& q) override {
    if (q.empty()) return std::nullopt;
    prepare(schema);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (!q.contains(weights_[i])) continue;
      if (!best || q.objective(weights_[i]) < q.objective(weights_[*best])) best = i;
    }
    if (!best) return std::nullopt;
    return BoundedResult{decode(*best), weights_[*best]};
  }

  [[nodiscard]] std::string name() const override { return "oracle"; }

 private:
  void prepare(const Schema& schema) {
    if (schema_ == &schema) return;
    detail::check_oracle_budget(schema, budget_);
    schema_ = &schema;
    k_ = schema.step_count;
    n_ = schema.user_count();
    weights_.clear();
    detail::PlanEvaluator eval(schema);
    detail::for_each_plan(k_, n_, [&](const std::vector<int>& plan) { weights_.push_back(eval(plan)); });
  }

  [[nodiscard]] std::vector<int> decode(std::size_t index) const {
    std::vector<int> plan(static_cast<std::size_t>(k_));
    for (int s = k_ - 1; s >= 0; --s) {
      plan[static_cast<std::size_t>(s)] = static_cast<int>(index % static_cast<std::size_t>(n_));
      index /= static_cast<std::size_t>(n_);
    }
    return plan;
  }

  std::uint64_t budget_;
  const Schema* schema_ = nullptr;
  int k_ = 0;
  int n_ = 0;
  std::vector<WeightPoint> weights_;
};

namespace detail {

class BoxGoal {
 public:
  explicit BoxGoal(const BoundedMinimizeQuery& q) : q_(q) {}

  PruneReason prune(Weight lb_auth, Weight lb_cons) const {
    if (lb_auth > q_.auth_hi) return PruneReason::AuthBound;
    if (lb_cons > q_.cons_hi) return PruneReason::ConsBound;
    if (best_ && (q_.alpha == 0 ? lb_auth : lb_cons) > q_.objective(best_->weights)) return PruneReason::Dominated;
    return PruneReason::None;
  }

  void leaf(const SearchState& st) {
    const Weight cons = st.exact_cons();
    if (cons < q_.cons_lo || cons > q_.cons_hi) return;
    const auto matrix = st.cost_matrix();
    const WeightPoint w{cons, min_assignment_value(matrix)};
    if (!q_.contains(w)) return;
    if (best_ && q_.objective(w) > q_.objective(best_->weights)) return;
    auto plan = st.plan_for(min_weight_block_assignment(matrix).users);
    if (!best_ || q_.objective(w) < q_.objective(best_->weights) || plan < best_->plan)
      best_ = BoundedResult{std::move(plan), w};
  }

  std::optional<BoundedResult>& best() { return best_; }

 private:
  const BoundedMinimizeQuery& q_;
  std::optional<BoundedResult> best_;
};

}  // namespace detail

/// Pattern search restricted to the box. Each pattern contributes only its
/// minimum-matching plan, so a box whose lower omega_A limit cuts between a
/// pattern's optimal matching and its costlier ones is not searched
/// exhaustively; every query issued by eps_front is of the safe kind.
class PatternBackend final : public BoundedMinimizer {
 public:
  explicit PatternBackend(SearchOptions options = {}) : options_(std::move(options)) { options_.threads = 1; }

  std::optional<BoundedResult> solve(const Schema& schema, const BoundedMinimizeQuery& q) override {
    if (q.empty()) return std::nullopt;
    const detail::SearchContext ctx(schema, options_.heuristic);
    detail::BoxGoal goal(q);
    detail::PatternSearch search(ctx, options_, goal);
    search.run();
    stats_.add(search.stats());
    return std::move(goal.best());
  }

  [[nodiscard]] std::string name() const override { return "pattern"; }
  [[nodiscard]] const SearchStats& stats() const { return stats_; }

 private:
  SearchOptions options_;
  SearchStats stats_;
};

struct EpsResult {
  ParetoFront front;
  int queries = 0;
};

/// The epsilon-constraint loop with epsilon = 1: anchors the minimum-omega_A
/// end, then the opposite end, then walks inwards one point per pair of
/// queries while both gaps exceed 1.
inline EpsResult eps_front_counted(const Schema& schema, BoundedMinimizer& backend) {
  EpsResult out{ParetoFront(schema.bounds), 0};
  const Weight ba = schema.bounds.auth;
  const Weight bc = schema.bounds.cons;
  auto ask = [&](int alpha, Weight a, Weight b, Weight c, Weight d) {
    ++out.queries;
    const BoundedMinimizeQuery q{alpha, a, b, c, d};
    try {
      auto r = backend.solve(schema, q);
      if (r && !q.contains(r->weights))
        throw Error("backend-outside-box", backend.name() + " returned a plan outside the box");
      return r;
    } catch (const Error& e) {
      throw Error(e.code(), e.detail() + " [query " + q.describe() + "]");
    }
  };
  auto keep = [&](const BoundedResult& r) { out.front.offer(r.weights, r.plan); };

  auto first = ask(0, 0, ba, 0, bc);
  if (!first) return out;
  auto left = ask(1, first->weights.auth, first->weights.auth, 0, bc);
  if (!left) return out;
  keep(*left);

  auto probe = ask(1, left->weights.auth + 1, ba, 0, left->weights.cons - 1);
  if (!probe) return out;
  auto right = ask(0, left->weights.auth + 1, ba, probe->weights.cons, probe->weights.cons);
  if (!right) return out;
  keep(*right);

  while (right->weights.auth - left->weights.auth > 1 && left->weights.cons - right->weights.cons > 1) {
    probe = ask(1, left->weights.auth + 1, right->weights.auth - 1, right->weights.cons + 1, left->weights.cons - 1);
    if (!probe) return out;
    auto mid = ask(0, left->weights.auth + 1, right->weights.auth - 1, probe->weights.cons, probe->weights.cons);
    if (!mid) return out;
    keep(*mid);
    right = std::move(mid);
  }
  return out;
}

inline ParetoFront eps_front(const Schema& schema, BoundedMinimizer& backend) {
  return eps_front_counted(schema, backend).front;
}

}  // namespace bowsp
