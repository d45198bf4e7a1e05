#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <thread>
#include <unordered_map>
#include <vector>

#include "matching.hpp"
#include "pareto.hpp"
#include "schema.hpp"

namespace bowsp {

// ---------------------------------------------------------------------------
// Branching heuristic configuration

/// Indexed [m - 1][t - 1] for m, t in 1..4; cells with m > t are unreachable.
using RhoTable = std::array<std::array<Weight, 4>, 4>;

struct HeuristicConfig {
  Weight psi_sod = 1;
  Weight psi_bod = 1;
  Weight psi_at_most = 5;
  Weight psi_at_least = 5;
  Weight psi_power = 5;
  Weight sod_inside_at_most = 50;
  Weight at_most_meets_at_least = 50;
  int overlap_threshold = 3;
  Weight positive_singleton = 1;
  RhoTable rho_at_most{{{0, 0, 0, 0}, {0, 0, 20, 0}, {0, 0, 500, 500}, {0, 0, 0, 200}}};
  RhoTable rho_at_least{{{0, 0, 10, 5}, {0, 0, 0, 20}, {0, 0, 0, 0}, {0, 0, 0, 0}}};

  [[nodiscard]] Weight psi(ConstraintKind kind) const {
    switch (kind) {
      case ConstraintKind::SeparationOfDuty: return psi_sod;
      case ConstraintKind::BindingOfDuty: return psi_bod;
      case ConstraintKind::AtMost: return psi_at_most;
      case ConstraintKind::AtLeast: return psi_at_least;
      case ConstraintKind::ExplicitPowerTable: return psi_power;
    }
    return 0;
  }

  /// rho^c(m, t); zero outside the tables and for kinds without one.
  [[nodiscard]] Weight rho(ConstraintKind kind, int m, int t) const {
    if (m < 1 || t < 1 || m > 4 || t > 4 || m > t) return 0;
    if (kind == ConstraintKind::AtMost) return rho_at_most[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(t - 1)];
    if (kind == ConstraintKind::AtLeast) return rho_at_least[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(t - 1)];
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Lower bounds

/// Minimum of c's table over the distinct-user counts still reachable from
/// m blocks on the scope with t' scope steps unassigned.
inline Weight lower_bound_from_counts(const WeightedConstraint& c, int m, int unassigned) {
  const int size = c.scope_size();
  const int lo = std::max(m, 1);
  const int hi = std::min(m + unassigned, size);
  Weight best = std::numeric_limits<Weight>::max();
  for (int x = lo; x <= hi; ++x) best = std::min(best, c.table[static_cast<std::size_t>(x - 1)]);
  return best;
}

inline Weight constraint_lower_bound(const WeightedConstraint& c, const Pattern& pattern) {
  const int m = pattern.blocks_touching(c.scope);
  const int unassigned = (c.scope - pattern.assigned()).size();
  return lower_bound_from_counts(c, m, unassigned);
}

namespace detail {

/// min over users of omega(B, u), or for non-monotone explicit tables the
/// minimum over every listed superset of B (and the default weight), which
/// stays a valid bound when B keeps growing.
class BlockMinCache {
 public:
  explicit BlockMinCache(const Schema& schema) : schema_(schema) {
    if (schema.step_count <= kDenseLimit)
      dense_.assign(std::size_t{1} << schema.step_count, kUnknown);
  }

  Weight operator()(StepSet block) {
    if (!dense_.empty()) {
      Weight& slot = dense_[block.bits()];
      if (slot == kUnknown) slot = compute(block);
      return slot;
    }
    auto [it, fresh] = sparse_.try_emplace(block.bits(), kUnknown);
    if (fresh) it->second = compute(block);
    return it->second;
  }

 private:
  static constexpr int kDenseLimit = 18;
  static constexpr Weight kUnknown = -1;

  Weight compute(StepSet block) const {
    Weight best = std::numeric_limits<Weight>::max();
    if (const auto* table = std::get_if<ExplicitTableAuth>(&schema_.auth)) {
      best = table->default_weight;
      for (const auto& [key, w] : table->entries)
        if (block.subset_of(StepSet(key.second))) best = std::min(best, w);
      return best;
    }
    for (int u = 0; u < schema_.user_count(); ++u) best = std::min(best, schema_.set_weight(block, u));
    return best;
  }

  const Schema& schema_;
  std::vector<Weight> dense_;
  std::unordered_map<std::uint64_t, Weight> sparse_;
};

struct ConstraintInfo {
  const WeightedConstraint* constraint = nullptr;
  int size = 0;
  std::vector<Weight> lb;  // lb[m * (size + 1) + unassigned]

  [[nodiscard]] Weight bound(int m, int unassigned) const {
    return lb[static_cast<std::size_t>(m * (size + 1) + unassigned)];
  }
};

/// Per-schema data shared by every search over it.
struct SearchContext {
  const Schema& schema;
  HeuristicConfig heuristic;
  int k = 0;
  int n = 0;
  std::vector<ConstraintInfo> constraints;
  std::vector<std::vector<int>> step_constraints;
  std::vector<Weight> phi;

  SearchContext(const Schema& s, HeuristicConfig cfg) : schema(s), heuristic(cfg), k(s.step_count), n(s.user_count()) {
    step_constraints.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < s.constraints.size(); ++i) {
      const auto& c = s.constraints[i];
      ConstraintInfo info{&c, c.scope_size(), {}};
      info.lb.assign(static_cast<std::size_t>((info.size + 1) * (info.size + 1)), 0);
      for (int m = 0; m <= info.size; ++m)
        for (int t = 0; t + m <= info.size; ++t)
          if (m + t > 0) info.lb[static_cast<std::size_t>(m * (info.size + 1) + t)] = lower_bound_from_counts(c, m, t);
      constraints.push_back(std::move(info));
      c.scope.for_each([&](int step) { step_constraints[static_cast<std::size_t>(step)].push_back(static_cast<int>(i)); });
    }
    phi.resize(static_cast<std::size_t>(k));
    for (int step = 0; step < k; ++step) phi[static_cast<std::size_t>(step)] = step_priority(step);
  }

  /// phi(s): constraint-type weights, the two structural interaction terms,
  /// and the number of users with positive singleton weight.
  [[nodiscard]] Weight step_priority(int step) const {
    const auto& cfg = heuristic;
    const auto& mine = step_constraints[static_cast<std::size_t>(step)];
    Weight total = 0;
    for (int ci : mine) total += cfg.psi(schema.constraints[static_cast<std::size_t>(ci)].kind);
    for (int a : mine) {
      const auto& ca = schema.constraints[static_cast<std::size_t>(a)];
      for (int b : mine) {
        const auto& cb = schema.constraints[static_cast<std::size_t>(b)];
        if (ca.kind == ConstraintKind::SeparationOfDuty && cb.kind == ConstraintKind::AtMost && ca.scope.subset_of(cb.scope) &&
            ca.scope != cb.scope)
          total += cfg.sod_inside_at_most;
        if (ca.kind == ConstraintKind::AtMost && cb.kind == ConstraintKind::AtLeast &&
            (ca.scope & cb.scope).size() >= cfg.overlap_threshold)
          total += cfg.at_most_meets_at_least;
      }
    }
    Weight positive = 0;
    for (int u = 0; u < n; ++u)
      if (schema.set_weight(StepSet::single(step), u) > 0) ++positive;
    return total + cfg.positive_singleton * positive;
  }
};

}  // namespace detail

/// (lower bound on omega_A, lower bound on omega_C) over all complete plans
/// whose pattern extends P.
inline std::pair<Weight, Weight> node_lower_bounds(const Schema& schema, const Pattern& pattern) {
  detail::BlockMinCache cache(schema);
  Weight auth = 0;
  for (auto b : pattern.blocks) auth = add_weights(auth, cache(b));
  Weight cons = 0;
  for (const auto& c : schema.constraints) cons = add_weights(cons, constraint_lower_bound(c, pattern));
  return {auth, cons};
}

/// rho(P, s) = phi(s) + sum over constraints on s of rho^c(m, t).
inline Weight branch_step_score(const Schema& schema, const Pattern& pattern, int step,
                                const HeuristicConfig& cfg = {}) {
  const detail::SearchContext ctx(schema, cfg);
  Weight score = ctx.phi[static_cast<std::size_t>(step)];
  const StepSet assigned = pattern.assigned();
  for (int ci : ctx.step_constraints[static_cast<std::size_t>(step)]) {
    const auto& c = schema.constraints[static_cast<std::size_t>(ci)];
    score += cfg.rho(c.kind, pattern.blocks_touching(c.scope), (assigned & c.scope).size());
  }
  return score;
}

// ---------------------------------------------------------------------------
// Pattern enumeration

/// All set partitions of {0..k-1} in restricted-growth-string order.
class PatternEnumerator {
 public:
  explicit PatternEnumerator(int k) : k_(k), rgs_(static_cast<std::size_t>(k), 0), max_(static_cast<std::size_t>(k), 0) {
    if (k < 1 || k > kMaxSteps) throw Error("bad-argument", "k must be in [1, 64]");
  }

  /// Writes the next pattern; false once every partition has been produced.
  bool next(Pattern& out) {
    if (done_) return false;
    if (started_ && !advance()) {
      done_ = true;
      return false;
    }
    started_ = true;
    out.blocks.clear();
    for (int s = 0; s < k_; ++s) {
      const auto b = static_cast<std::size_t>(rgs_[static_cast<std::size_t>(s)]);
      if (b == out.blocks.size()) out.blocks.emplace_back();
      out.blocks[b].insert(s);
    }
    return true;
  }

 private:
  bool advance() {
    for (int i = k_ - 1; i >= 1; --i) {
      const auto ui = static_cast<std::size_t>(i);
      if (rgs_[ui] <= max_[ui - 1]) {
        ++rgs_[ui];
        const int top = std::max(max_[ui - 1], rgs_[ui]);
        max_[ui] = top;
        for (int j = i + 1; j < k_; ++j) {
          rgs_[static_cast<std::size_t>(j)] = 0;
          max_[static_cast<std::size_t>(j)] = top;
        }
        return true;
      }
    }
    return false;
  }

  int k_;
  std::vector<int> rgs_;
  std::vector<int> max_;  // max_[i] = max(rgs_[0..i])
  bool started_ = false;
  bool done_ = false;
};

inline std::vector<Pattern> enumerate_patterns(int k) {
  std::vector<Pattern> out;
  PatternEnumerator gen(k);
  Pattern p;
  while (gen.next(p)) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Search

enum class BranchOrder { Heuristic, Index, Random };

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
  std::uint64_t pruned_dominated = 0;
  std::uint64_t pruned_auth_bound = 0;
  std::uint64_t pruned_cons_bound = 0;
  std::uint64_t matchings = 0;
  bool timed_out = false;

  void add(const SearchStats& o) {
    nodes += o.nodes;
    leaves += o.leaves;
    pruned_dominated += o.pruned_dominated;
    pruned_auth_bound += o.pruned_auth_bound;
    pruned_cons_bound += o.pruned_cons_bound;
    matchings += o.matchings;
    timed_out = timed_out || o.timed_out;
  }
};

/// Called once per visited node with the node's pattern and bounds.
using NodeObserver = std::function<void(const Pattern&, Weight lb_auth, Weight lb_cons)>;

struct SearchOptions {
  BranchOrder order = BranchOrder::Heuristic;
  std::uint64_t seed = 0;  // for BranchOrder::Random
  bool prune = true;
  int threads = 1;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  NodeObserver observer;
  HeuristicConfig heuristic;
};

namespace detail {

enum class PruneReason { None, Dominated, AuthBound, ConsBound };

struct Move {
  int step = 0;
  int block = 0;  // index of the joined block, or the block count to open one
};

/// Incremental DFS state: blocks, per-block bounds and per-constraint counts.
class SearchState {
 public:
  SearchState(const SearchContext& ctx, BlockMinCache& cache)
      : ctx_(ctx), cache_(cache), m_(ctx.constraints.size(), 0), assigned_in_(ctx.constraints.size(), 0) {
    for (const auto& info : ctx.constraints) lb_cons_ += info.bound(0, info.size);
  }

  [[nodiscard]] const std::vector<StepSet>& blocks() const { return blocks_; }
  [[nodiscard]] StepSet assigned() const { return assigned_; }
  [[nodiscard]] Weight lb_auth() const { return lb_auth_; }
  [[nodiscard]] Weight lb_cons() const { return lb_cons_; }
  [[nodiscard]] bool complete() const { return assigned_.size() == ctx_.k; }
  [[nodiscard]] int block_count() const { return static_cast<int>(blocks_.size()); }

  void apply(Move mv) {
    const bool fresh = mv.block == block_count();
    if (fresh) {
      blocks_.emplace_back();
      block_min_.push_back(0);
    }
    const auto q = static_cast<std::size_t>(mv.block);
    const StepSet before = blocks_[q];
    blocks_[q].insert(mv.step);
    assigned_.insert(mv.step);
    const Weight w = cache_(blocks_[q]);
    lb_auth_ = add_weights(lb_auth_ - block_min_[q], w);
    block_min_[q] = w;
    for (int ci : ctx_.step_constraints[static_cast<std::size_t>(mv.step)]) {
      const auto i = static_cast<std::size_t>(ci);
      const auto& info = ctx_.constraints[i];
      lb_cons_ -= info.bound(m_[i], info.size - assigned_in_[i]);
      if (!before.intersects(info.constraint->scope)) ++m_[i];
      ++assigned_in_[i];
      lb_cons_ = add_weights(lb_cons_, info.bound(m_[i], info.size - assigned_in_[i]));
    }
  }

  void undo(Move mv) {
    const auto q = static_cast<std::size_t>(mv.block);
    blocks_[q].erase(mv.step);
    assigned_.erase(mv.step);
    const StepSet after = blocks_[q];
    for (int ci : ctx_.step_constraints[static_cast<std::size_t>(mv.step)]) {
      const auto i = static_cast<std::size_t>(ci);
      const auto& info = ctx_.constraints[i];
      lb_cons_ -= info.bound(m_[i], info.size - assigned_in_[i]);
      if (!after.intersects(info.constraint->scope)) --m_[i];
      --assigned_in_[i];
      lb_cons_ += info.bound(m_[i], info.size - assigned_in_[i]);
    }
    lb_auth_ -= block_min_[q];
    if (after.empty()) {
      blocks_.pop_back();
      block_min_.pop_back();
    } else {
      block_min_[q] = cache_(after);
      lb_auth_ += block_min_[q];
    }
  }

  /// Next step to branch on.
  [[nodiscard]] int choose_step(const SearchOptions& opt) const {
    const StepSet open = ctx_.schema.all_steps() - assigned_;
    if (opt.order == BranchOrder::Index) return open.lowest();
    if (opt.order == BranchOrder::Random) {
      // Hash of the node itself, so the choice does not depend on visit order.
      std::uint64_t h = opt.seed ^ 0x9e3779b97f4a7c15ULL;
      for (auto b : blocks_) h = (h ^ b.bits()) * 0x100000001b3ULL + 0x9e3779b97f4a7c15ULL;
      h ^= h >> 29;
      const auto steps = open.elements();
      return steps[static_cast<std::size_t>(h % steps.size())];
    }
    int best = -1;
    Weight best_score = 0;
    open.for_each([&](int s) {
      Weight score = ctx_.phi[static_cast<std::size_t>(s)];
      for (int ci : ctx_.step_constraints[static_cast<std::size_t>(s)]) {
        const auto i = static_cast<std::size_t>(ci);
        score += ctx_.heuristic.rho(ctx_.constraints[i].constraint->kind, m_[i], assigned_in_[i]);
      }
      if (best < 0 || score > best_score) {
        best = s;
        best_score = score;
      }
    });
    return best;
  }

  [[nodiscard]] Pattern pattern() const { return Pattern{blocks_}; }

  /// Exact omega_C once the pattern is complete.
  [[nodiscard]] Weight exact_cons() const { return lb_cons_; }

  [[nodiscard]] BlockUserCostMatrix cost_matrix() const { return BlockUserCostMatrix::of(ctx_.schema, blocks_); }

  [[nodiscard]] std::vector<int> plan_for(const std::vector<int>& block_users) const {
    std::vector<int> plan(static_cast<std::size_t>(ctx_.k), kUnassigned);
    for (std::size_t q = 0; q < blocks_.size(); ++q)
      blocks_[q].for_each([&](int s) { plan[static_cast<std::size_t>(s)] = block_users[q]; });
    return plan;
  }

 private:
  const SearchContext& ctx_;
  BlockMinCache& cache_;
  std::vector<StepSet> blocks_;
  std::vector<Weight> block_min_;
  StepSet assigned_;
  Weight lb_auth_ = 0;
  Weight lb_cons_ = 0;
  std::vector<int> m_;
  std::vector<int> assigned_in_;
};

/// Depth-first pattern search driving a goal object:
///   PruneReason goal.prune(lb_auth, lb_cons)
///   void goal.leaf(const SearchState&)
template <typename Goal>
class PatternSearch {
 public:
  PatternSearch(const SearchContext& ctx, const SearchOptions& opt, Goal& goal)
      : ctx_(ctx), opt_(opt), goal_(goal), cache_(ctx.schema), state_(ctx, cache_) {}

  /// Replays a prefix of moves (no visits), then searches below it.
  void run(const std::vector<Move>& prefix = {}) {
    for (auto mv : prefix) state_.apply(mv);
    dfs();
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) state_.undo(*it);
  }

  /// Collects every node at `depth` assigned steps (or earlier leaves) as
  /// move prefixes, in DFS order. Only the bound tests prune here.
  void collect(int depth, std::vector<std::vector<Move>>& out) {
    std::vector<Move> path;
    collect_rec(depth, path, out);
  }

  [[nodiscard]] const SearchStats& stats() const { return stats_; }
  SearchState& state() { return state_; }

 private:
  void visit_stats_and_observer() {
    ++stats_.nodes;
    if (opt_.observer) opt_.observer(state_.pattern(), state_.lb_auth(), state_.lb_cons());
  }

  bool out_of_time() {
    if (stats_.timed_out) return true;
    if (opt_.deadline && (stats_.nodes & 1023U) == 0 && std::chrono::steady_clock::now() > *opt_.deadline)
      stats_.timed_out = true;
    return stats_.timed_out;
  }

  bool pruned() {
    if (!opt_.prune) return false;
    switch (goal_.prune(state_.lb_auth(), state_.lb_cons())) {
      case PruneReason::None: return false;
      case PruneReason::Dominated: ++stats_.pruned_dominated; return true;
      case PruneReason::AuthBound: ++stats_.pruned_auth_bound; return true;
      case PruneReason::ConsBound: ++stats_.pruned_cons_bound; return true;
    }
    return false;
  }

  void dfs() {
    visit_stats_and_observer();
    if (out_of_time() || pruned()) return;
    if (state_.complete()) {
      ++stats_.leaves;
      goal_.leaf(state_);
      return;
    }
    const int s = state_.choose_step(opt_);
    const int p = state_.block_count();
    for (int q = 0; q <= p; ++q) {
      if (q == p && p >= ctx_.n) break;
      const Move mv{s, q};
      state_.apply(mv);
      dfs();
      state_.undo(mv);
      if (stats_.timed_out) return;
    }
  }

  void collect_rec(int depth, std::vector<Move>& path, std::vector<std::vector<Move>>& out) {
    if (state_.complete() || static_cast<int>(path.size()) == depth) {
      out.push_back(path);
      return;
    }
    const int s = state_.choose_step(opt_);
    const int p = state_.block_count();
    for (int q = 0; q <= p; ++q) {
      if (q == p && p >= ctx_.n) break;
      const Move mv{s, q};
      state_.apply(mv);
      path.push_back(mv);
      collect_rec(depth, path, out);
      path.pop_back();
      state_.undo(mv);
    }
  }

  const SearchContext& ctx_;
  const SearchOptions& opt_;
  Goal& goal_;
  BlockMinCache cache_;
  SearchState state_;
  SearchStats stats_;
};

/// Front-building goal. `shared` is the cross-worker front in parallel runs;
/// it only prunes by strict dominance so every worker still reaches the
/// first plan (in DFS order) of each final weight point.
class FrontGoal {
 public:
  FrontGoal(Bounds bounds, ParetoFront& local, const ParetoFront* shared = nullptr, std::shared_mutex* mutex = nullptr)
      : bounds_(bounds), local_(local), shared_(shared), mutex_(mutex) {}

  PruneReason prune(Weight lb_auth, Weight lb_cons) const {
    if (lb_auth > bounds_.auth) return PruneReason::AuthBound;
    if (lb_cons > bounds_.cons) return PruneReason::ConsBound;
    const WeightPoint lb{lb_cons, lb_auth};
    if (local_.covers(lb) || strictly_dominated_by_shared(lb)) return PruneReason::Dominated;
    return PruneReason::None;
  }

  void leaf(const SearchState& st) {
    const Weight cons = st.exact_cons();
    if (cons > bounds_.cons) return;
    const auto matrix = st.cost_matrix();
    ++matchings;
    const Weight auth = min_assignment_value(matrix);
    const WeightPoint w{cons, auth};
    if (!local_.accepts(w) || strictly_dominated_by_shared(w)) return;
    const auto best = min_weight_block_assignment(matrix);
    local_.offer(w, st.plan_for(best.users));
    if (shared_ != nullptr) {
      std::unique_lock lock(*mutex_);
      const_cast<ParetoFront*>(shared_)->offer(w, st.plan_for(best.users));
    }
  }

  std::uint64_t matchings = 0;

 private:
  bool strictly_dominated_by_shared(WeightPoint w) const {
    if (shared_ == nullptr) return false;
    std::shared_lock lock(*mutex_);
    for (const auto& p : shared_->points()) {
      if (p.weights.cons > w.cons) break;
      if (dominates(p.weights, w)) return true;
    }
    return false;
  }

  Bounds bounds_;
  ParetoFront& local_;
  const ParetoFront* shared_;
  std::shared_mutex* mutex_;
};

}  // namespace detail

struct PbbResult {
  ParetoFront front;
  SearchStats stats;
};

/// Pattern branch and bound: the Pareto front of plans with
/// omega_A <= B_A and omega_C <= B_C, one witness per weight point.
inline PbbResult pbb_search(const Schema& schema, const SearchOptions& opt = {}) {
  const detail::SearchContext ctx(schema, opt.heuristic);
  PbbResult result{ParetoFront(schema.bounds), {}};

  if (opt.threads <= 1) {
    detail::FrontGoal goal(schema.bounds, result.front);
    detail::PatternSearch search(ctx, opt, goal);
    search.run();
    result.stats = search.stats();
    result.stats.matchings = goal.matchings;
    return result;
  }

  // Parallel: split the tree at a fixed depth into DFS-ordered tasks; each
  // task keeps a local front, merged in task order afterwards.
  std::vector<std::vector<detail::Move>> tasks;
  {
    ParetoFront scratch;
    detail::FrontGoal goal(schema.bounds, scratch);
    detail::PatternSearch splitter(ctx, opt, goal);
    const int want = 16 * opt.threads;
    for (int depth = 1; depth <= ctx.k; ++depth) {
      tasks.clear();
      splitter.collect(depth, tasks);
      if (static_cast<int>(tasks.size()) >= want) break;
    }
  }

  ParetoFront shared(schema.bounds);
  std::shared_mutex mutex;
  std::vector<ParetoFront> locals(tasks.size(), ParetoFront(schema.bounds));
  std::vector<SearchStats> stats(static_cast<std::size_t>(opt.threads));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(opt.threads));

  auto worker = [&](std::size_t id) {
    try {
      for (std::size_t t = next++; t < tasks.size(); t = next++) {
        detail::FrontGoal goal(schema.bounds, locals[t], &shared, &mutex);
        detail::PatternSearch search(ctx, opt, goal);
        search.run(tasks[t]);
        auto s = search.stats();
        s.matchings = goal.matchings;
        stats[id].add(s);
      }
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < opt.threads; ++i) pool.emplace_back(worker, static_cast<std::size_t>(i));
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& local : locals) result.front.merge(local);
  for (const auto& s : stats) result.stats.add(s);
  return result;
}

inline ParetoFront pbb_front(const Schema& schema, const SearchOptions& opt = {}) {
  return pbb_search(schema, opt).front;
}

/// Plain enumeration of every complete pattern with one optimal matching
/// each.
inline ParetoFront enumeration_front(const Schema& schema) {
  ParetoFront front(schema.bounds);
  PatternEnumerator gen(schema.step_count);
  Pattern p;
  while (gen.next(p)) {
    if (static_cast<int>(p.blocks.size()) > schema.user_count()) continue;
    const Weight cons = constraint_weight(schema, p);
    if (cons > schema.bounds.cons) continue;
    const auto matrix = BlockUserCostMatrix::of(schema, p.blocks);
    const WeightPoint w{cons, min_assignment_value(matrix)};
    if (!front.accepts(w)) continue;
    const auto best = min_weight_block_assignment(matrix);
    std::vector<int> plan(static_cast<std::size_t>(schema.step_count));
    for (std::size_t q = 0; q < p.blocks.size(); ++q)
      p.blocks[q].for_each([&](int s) { plan[static_cast<std::size_t>(s)] = best.users[q]; });
    front.offer(w, std::move(plan));
  }
  return front;
}

}  // namespace bowsp
