#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <map>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "step_set.hpp"

namespace bowsp {

/// All weights are exact non-negative integers; rationals are pre-scaled by
/// Schema::weight_scale.
using Weight = std::int64_t;

inline constexpr Weight kDefaultProhibitive = 1'000'000;

inline Weight add_weights(Weight a, Weight b) {
  Weight r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw Error("weight-overflow", "sum exceeds 64-bit range");
  return r;
}

inline Weight mul_weights(Weight a, Weight b) {
  Weight r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw Error("weight-overflow", "product exceeds 64-bit range");
  return r;
}

// ---------------------------------------------------------------------------
// Constraints

enum class ConstraintKind { SeparationOfDuty, BindingOfDuty, AtMost, AtLeast, ExplicitPowerTable };

/// A weighted user-independent constraint. Its weight depends only on the
/// number m of distinct users on the scope: table[m - 1], m in [1, |scope|].
struct WeightedConstraint {
  ConstraintKind kind = ConstraintKind::ExplicitPowerTable;
  StepSet scope;
  int r = 0;  // threshold for AtMost / AtLeast
  std::vector<Weight> table;

  [[nodiscard]] int scope_size() const { return scope.size(); }

  [[nodiscard]] Weight penalty(int distinct_users) const {
    if (distinct_users < 1 || distinct_users > scope_size())
      throw Error("bad-count", "distinct user count outside [1, |T|]");
    return table[static_cast<std::size_t>(distinct_users - 1)];
  }

  static WeightedConstraint separation_of_duty(int s, int t, Weight penalty) {
    return make(ConstraintKind::SeparationOfDuty, StepSet::single(s) | StepSet::single(t), 0, {penalty, 0});
  }
  static WeightedConstraint binding_of_duty(int s, int t, Weight penalty) {
    return make(ConstraintKind::BindingOfDuty, StepSet::single(s) | StepSet::single(t), 0, {0, penalty});
  }
  static WeightedConstraint at_most(StepSet scope, int r, std::vector<Weight> table) {
    return make(ConstraintKind::AtMost, scope, r, std::move(table));
  }
  static WeightedConstraint at_least(StepSet scope, int r, std::vector<Weight> table) {
    return make(ConstraintKind::AtLeast, scope, r, std::move(table));
  }
  static WeightedConstraint power_table(StepSet scope, std::vector<Weight> table) {
    return make(ConstraintKind::ExplicitPowerTable, scope, 0, std::move(table));
  }

  static WeightedConstraint make(ConstraintKind kind, StepSet scope, int r, std::vector<Weight> table) {
    WeightedConstraint c{kind, scope, r, std::move(table)};
    c.validate();
    return c;
  }

  /// Checks the shape rules of each kind; throws Error("bad-constraint").
  void validate() const {
    const int size = scope_size();
    if (size == 0) throw Error("bad-constraint", "empty scope");
    if (static_cast<int>(table.size()) != size)
      throw Error("bad-constraint", "table length must equal scope size");
    for (Weight w : table)
      if (w < 0) throw Error("negative-weight", "constraint penalty is negative");
    switch (kind) {
      case ConstraintKind::SeparationOfDuty:
        if (size != 2 || table[1] != 0) throw Error("bad-constraint", "SoD needs |T| = 2 and table [M, 0]");
        break;
      case ConstraintKind::BindingOfDuty:
        if (size != 2 || table[0] != 0) throw Error("bad-constraint", "BoD needs |T| = 2 and table [0, M]");
        break;
      case ConstraintKind::AtMost:
        if (r < 1 || r > size) throw Error("bad-constraint", "at-most threshold outside [1, |T|]");
        for (int m = 1; m <= r; ++m)
          if (table[static_cast<std::size_t>(m - 1)] != 0)
            throw Error("bad-constraint", "at-most table must be 0 for m <= r");
        break;
      case ConstraintKind::AtLeast:
        if (r < 1 || r > size) throw Error("bad-constraint", "at-least threshold outside [1, |T|]");
        for (int m = r; m <= size; ++m)
          if (table[static_cast<std::size_t>(m - 1)] != 0)
            throw Error("bad-constraint", "at-least table must be 0 for m >= r");
        break;
      case ConstraintKind::ExplicitPowerTable:
        break;
    }
  }

  bool operator==(const WeightedConstraint&) const = default;
};

// ---------------------------------------------------------------------------
// Users and the weighted set-authorization function

struct PlainProfile {
  bool operator==(const PlainProfile&) const = default;
};

/// Generated staff member: free on `authorized`, sigma per step of
/// `fallback`, prohibitive elsewhere.
struct StaffProfile {
  StepSet authorized;
  StepSet fallback;
  Weight sigma = 0;
  bool operator==(const StaffProfile&) const = default;
};

/// External consultant: sigma if every assigned step is in `fallback`,
/// prohibitive otherwise.
struct ConsultantProfile {
  StepSet fallback;
  Weight sigma = 0;
  bool operator==(const ConsultantProfile&) const = default;
};

using UserProfile = std::variant<PlainProfile, StaffProfile, ConsultantProfile>;

struct UserSpec {
  std::string name;
  UserProfile profile;
  bool operator==(const UserSpec&) const = default;
};

/// omega(T, u) looked up per (user, step set); unlisted non-empty sets weigh
/// `default_weight`.
struct ExplicitTableAuth {
  Weight default_weight = kDefaultProhibitive;
  std::map<std::pair<int, std::uint64_t>, Weight> entries;  // (user, step mask)

  void set(int user, StepSet steps, Weight w) { entries[{user, steps.bits()}] = w; }
  bool operator==(const ExplicitTableAuth&) const = default;
};

/// omega(T, u) is computed from each user's Staff/Consultant profile.
struct ProfileAuth {
  Weight prohibitive = kDefaultProhibitive;
  bool operator==(const ProfileAuth&) const = default;
};

/// omega(T, u) = sum over s in T of w(s, u); dense step-major k x n matrix.
struct PerStepLinearAuth {
  std::vector<Weight> weights;
  bool operator==(const PerStepLinearAuth&) const = default;
};

/// Authorization A(s,u), known availability alpha(s,u) and unavailability
/// probability rho(s,u) (scaled by the schema's weight_scale). Step-major.
struct AvailabilityModel {
  int step_count = 0;
  int user_count = 0;
  std::vector<std::uint8_t> authorized;
  std::vector<std::uint8_t> available;
  std::vector<Weight> rho;
  Weight prohibitive = kDefaultProhibitive;

  [[nodiscard]] std::size_t at(int s, int u) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(user_count) + static_cast<std::size_t>(u);
  }
  [[nodiscard]] Weight step_weight(int s, int u) const {
    const auto i = at(s, u);
    return (authorized[i] != 0 && available[i] != 0) ? rho[i] : prohibitive;
  }
  bool operator==(const AvailabilityModel&) const = default;
};

struct AvailabilityAuth {
  AvailabilityModel model;
  bool operator==(const AvailabilityAuth&) const = default;
};

using SetAuthorizationFn = std::variant<ExplicitTableAuth, ProfileAuth, PerStepLinearAuth, AvailabilityAuth>;

struct Bounds {
  Weight auth = 1000;  // B_A
  Weight cons = 1000;  // B_C
  bool operator==(const Bounds&) const = default;
};

// ---------------------------------------------------------------------------
// Schema

struct Schema {
  int step_count = 0;
  /// predecessors[j] = { i : s_i < s_j }, transitively closed.
  std::vector<StepSet> predecessors;
  std::vector<UserSpec> users;
  std::vector<WeightedConstraint> constraints;
  SetAuthorizationFn auth;
  Weight weight_scale = 1;
  Bounds bounds;

  [[nodiscard]] int user_count() const { return static_cast<int>(users.size()); }
  [[nodiscard]] StepSet all_steps() const { return StepSet::first_n(step_count); }

  /// omega(T, u); omega(empty, u) = 0.
  [[nodiscard]] Weight set_weight(StepSet steps, int user) const {
    if (steps.empty()) return 0;
    return std::visit([&](const auto& fn) { return eval(fn, steps, user); }, auth);
  }

  /// True when omega(T, u) <= omega(T', u) for all T subset of T'. Every form
  /// but the explicit table is monotone by construction.
  [[nodiscard]] bool auth_is_monotone() const { return !std::holds_alternative<ExplicitTableAuth>(auth); }

  bool operator==(const Schema&) const = default;

 private:
  Weight eval(const ExplicitTableAuth& fn, StepSet steps, int user) const {
    auto it = fn.entries.find({user, steps.bits()});
    return it == fn.entries.end() ? fn.default_weight : it->second;
  }

  Weight eval(const ProfileAuth& fn, StepSet steps, int user) const {
    const auto& profile = users[static_cast<std::size_t>(user)].profile;
    if (const auto* staff = std::get_if<StaffProfile>(&profile)) {
      const Weight fallback = mul_weights(staff->sigma, (steps & staff->fallback).size());
      const Weight outside = mul_weights(fn.prohibitive, (steps - (staff->authorized | staff->fallback)).size());
      return add_weights(fallback, outside);
    }
    if (const auto* consultant = std::get_if<ConsultantProfile>(&profile))
      return steps.subset_of(consultant->fallback) ? consultant->sigma : fn.prohibitive;
    return mul_weights(fn.prohibitive, steps.size());
  }

  Weight eval(const PerStepLinearAuth& fn, StepSet steps, int user) const {
    Weight total = 0;
    const auto n = static_cast<std::size_t>(user_count());
    steps.for_each([&](int s) {
      total = add_weights(total, fn.weights[static_cast<std::size_t>(s) * n + static_cast<std::size_t>(user)]);
    });
    return total;
  }

  Weight eval(const AvailabilityAuth& fn, StepSet steps, int user) const {
    Weight total = 0;
    steps.for_each([&](int s) { total = add_weights(total, fn.model.step_weight(s, user)); });
    return total;
  }
};

/// Builds a dense per-step matrix auth for k steps and n users, every entry
/// `fill`.
inline PerStepLinearAuth per_step_matrix(int k, int n, Weight fill) {
  return PerStepLinearAuth{std::vector<Weight>(static_cast<std::size_t>(k) * static_cast<std::size_t>(n), fill)};
}

inline void set_step_weight(PerStepLinearAuth& a, int n, int s, int u, Weight w) {
  a.weights[static_cast<std::size_t>(s) * static_cast<std::size_t>(n) + static_cast<std::size_t>(u)] = w;
}

/// The schema restricted to the listed users (0-based, in the given order).
inline Schema select_users(const Schema& schema, const std::vector<int>& keep) {
  Schema out = schema;
  out.users.clear();
  for (int u : keep) out.users.push_back(schema.users[static_cast<std::size_t>(u)]);
  const auto k = static_cast<std::size_t>(schema.step_count);
  const auto n = static_cast<std::size_t>(schema.user_count());
  const auto m = keep.size();
  auto pick = [&](const auto& dense, auto& target) {
    target.assign(k * m, {});
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t j = 0; j < m; ++j) target[s * m + j] = dense[s * n + static_cast<std::size_t>(keep[j])];
  };
  if (const auto* lin = std::get_if<PerStepLinearAuth>(&schema.auth)) {
    PerStepLinearAuth a;
    pick(lin->weights, a.weights);
    out.auth = std::move(a);
  } else if (const auto* av = std::get_if<AvailabilityAuth>(&schema.auth)) {
    AvailabilityAuth a{av->model};
    a.model.user_count = static_cast<int>(m);
    pick(av->model.authorized, a.model.authorized);
    pick(av->model.available, a.model.available);
    pick(av->model.rho, a.model.rho);
    out.auth = std::move(a);
  } else if (const auto* table = std::get_if<ExplicitTableAuth>(&schema.auth)) {
    ExplicitTableAuth a;
    a.default_weight = table->default_weight;
    for (std::size_t j = 0; j < m; ++j)
      for (auto it = table->entries.lower_bound({keep[j], 0}); it != table->entries.end() && it->first.first == keep[j]; ++it)
        a.entries[{static_cast<int>(j), it->first.second}] = it->second;
    out.auth = std::move(a);
  }
  return out;
}

/// Transitively closes a list of (before, after) pairs. Throws on cycles.
inline std::vector<StepSet> close_order(int k, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<StepSet> pred(static_cast<std::size_t>(k));
  for (auto [i, j] : pairs) {
    if (i == j) throw Error("cyclic-order", "step ordered before itself");
    pred[static_cast<std::size_t>(j)].insert(i);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int j = 0; j < k; ++j) {
      StepSet acc = pred[static_cast<std::size_t>(j)];
      pred[static_cast<std::size_t>(j)].for_each([&](int i) { acc = acc | pred[static_cast<std::size_t>(i)]; });
      if (acc != pred[static_cast<std::size_t>(j)]) {
        pred[static_cast<std::size_t>(j)] = acc;
        changed = true;
      }
    }
  }
  for (int j = 0; j < k; ++j)
    if (pred[static_cast<std::size_t>(j)].contains(j)) throw Error("cyclic-order", "order relation has a cycle");
  return pred;
}

/// Hasse diagram of a closed order, pairs sorted lexicographically.
inline std::vector<std::pair<int, int>> order_reduction(const std::vector<StepSet>& pred) {
  std::vector<std::pair<int, int>> out;
  const int k = static_cast<int>(pred.size());
  for (int j = 0; j < k; ++j) {
    pred[static_cast<std::size_t>(j)].for_each([&](int i) {
      bool covered = false;
      pred[static_cast<std::size_t>(j)].for_each([&](int m) {
        if (m != i && pred[static_cast<std::size_t>(m)].contains(i)) covered = true;
      });
      if (!covered) out.emplace_back(i, j);
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Structural checks shared by the loader and programmatic builders.
inline void validate_schema(const Schema& schema) {
  if (schema.step_count < 1 || schema.step_count > kMaxSteps)
    throw Error("bad-schema", "step count must be in [1, 64]");
  if (schema.users.empty()) throw Error("bad-schema", "no users");
  if (schema.weight_scale < 1) throw Error("bad-schema", "weight_scale must be positive");
  if (schema.bounds.auth < 0 || schema.bounds.cons < 0) throw Error("negative-weight", "negative bound");
  if (static_cast<int>(schema.predecessors.size()) != schema.step_count)
    throw Error("bad-schema", "order size mismatch");
  const StepSet all = schema.all_steps();
  for (const auto& c : schema.constraints) {
    if (!c.scope.subset_of(all)) throw Error("dangling-step", "constraint scope names an unknown step");
    c.validate();
  }
  const auto n = static_cast<std::size_t>(schema.user_count());
  const auto k = static_cast<std::size_t>(schema.step_count);
  if (const auto* linear = std::get_if<PerStepLinearAuth>(&schema.auth)) {
    if (linear->weights.size() != k * n) throw Error("bad-schema", "per-step matrix size mismatch");
    for (Weight w : linear->weights)
      if (w < 0) throw Error("negative-weight", "negative per-step weight");
  } else if (const auto* avail = std::get_if<AvailabilityAuth>(&schema.auth)) {
    const auto& m = avail->model;
    if (m.step_count != schema.step_count || m.user_count != schema.user_count() || m.rho.size() != k * n ||
        m.authorized.size() != k * n || m.available.size() != k * n)
      throw Error("bad-schema", "availability model size mismatch");
    for (Weight w : m.rho)
      if (w < 0 || w > schema.weight_scale) throw Error("bad-schema", "rho outside [0, weight_scale]");
  } else if (const auto* table = std::get_if<ExplicitTableAuth>(&schema.auth)) {
    if (table->default_weight < 0) throw Error("negative-weight", "negative default weight");
    for (const auto& [key, w] : table->entries) {
      if (w < 0) throw Error("negative-weight", "negative set weight");
      if (key.first < 0 || key.first >= schema.user_count()) throw Error("bad-schema", "auth entry names an unknown user");
      if (!StepSet(key.second).subset_of(all)) throw Error("dangling-step", "auth entry names an unknown step");
      if (key.second == 0 && w != 0) throw Error("empty-set-weight", "omega(empty, u) must be 0");
    }
  } else if (const auto* prof = std::get_if<ProfileAuth>(&schema.auth)) {
    if (prof->prohibitive < 0) throw Error("negative-weight", "negative prohibitive weight");
    for (const auto& u : schema.users) {
      if (std::holds_alternative<PlainProfile>(u.profile))
        throw Error("bad-schema", "profile authorization needs staff or consultant users");
      if (const auto* s = std::get_if<StaffProfile>(&u.profile)) {
        if (s->sigma < 0) throw Error("negative-weight", "negative sigma");
        if (!(s->authorized | s->fallback).subset_of(all)) throw Error("dangling-step", "profile step");
      }
      if (const auto* c = std::get_if<ConsultantProfile>(&u.profile)) {
        if (c->sigma < 0) throw Error("negative-weight", "negative sigma");
        if (!c->fallback.subset_of(all)) throw Error("dangling-step", "profile step");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Plans and patterns

inline constexpr int kUnassigned = -1;

/// A (partial) plan: assignment[s] is a user index or kUnassigned.
struct Plan {
  std::vector<int> assignment;
  Weight constraint_weight = 0;
  Weight auth_weight = 0;

  [[nodiscard]] bool complete() const {
    return std::none_of(assignment.begin(), assignment.end(), [](int u) { return u == kUnassigned; });
  }
  bool operator==(const Plan&) const = default;
};

struct WeightPoint {
  Weight cons = 0;  // omega_C
  Weight auth = 0;  // omega_A
  bool operator==(const WeightPoint&) const = default;
  auto operator<=>(const WeightPoint&) const = default;
};

/// Partition of the assigned steps into blocks, canonically ordered by each
/// block's lowest step.
struct Pattern {
  std::vector<StepSet> blocks;

  [[nodiscard]] StepSet assigned() const {
    StepSet a;
    for (auto b : blocks) a = a | b;
    return a;
  }

  [[nodiscard]] int blocks_touching(StepSet scope) const {
    return static_cast<int>(std::count_if(blocks.begin(), blocks.end(), [&](StepSet b) { return b.intersects(scope); }));
  }

  void canonicalize() {
    std::sort(blocks.begin(), blocks.end(), [](StepSet a, StepSet b) { return a.lowest() < b.lowest(); });
  }

  /// P(pi): the canonical pattern of a (partial) plan.
  static Pattern of(const std::vector<int>& assignment) {
    Pattern p;
    std::vector<int> user_block;
    std::vector<int> owners;
    for (int s = 0; s < static_cast<int>(assignment.size()); ++s) {
      const int u = assignment[static_cast<std::size_t>(s)];
      if (u == kUnassigned) continue;
      auto it = std::find(owners.begin(), owners.end(), u);
      if (it == owners.end()) {
        owners.push_back(u);
        p.blocks.push_back(StepSet::single(s));
      } else {
        p.blocks[static_cast<std::size_t>(it - owners.begin())].insert(s);
      }
    }
    return p;  // blocks appear in order of first step, already canonical
  }

  bool operator==(const Pattern&) const = default;
};

/// omega_c of a pattern covering the constraint's whole scope.
inline Weight constraint_weight_of_pattern(const WeightedConstraint& c, const Pattern& pattern) {
  if (!c.scope.subset_of(pattern.assigned())) throw Error("partial-scope", "pattern does not assign the whole scope");
  return c.penalty(pattern.blocks_touching(c.scope));
}

inline Weight constraint_weight(const Schema& schema, const Pattern& pattern) {
  Weight total = 0;
  for (const auto& c : schema.constraints) total = add_weights(total, constraint_weight_of_pattern(c, pattern));
  return total;
}

/// omega_A of a complete or partial plan: sum over users of omega(pi^-1(u), u).
inline Weight auth_weight(const Schema& schema, const std::vector<int>& assignment) {
  std::vector<std::pair<int, StepSet>> per_user;
  for (int s = 0; s < static_cast<int>(assignment.size()); ++s) {
    const int u = assignment[static_cast<std::size_t>(s)];
    if (u == kUnassigned) continue;
    auto it = std::find_if(per_user.begin(), per_user.end(), [u](const auto& e) { return e.first == u; });
    if (it == per_user.end())
      per_user.emplace_back(u, StepSet::single(s));
    else
      it->second.insert(s);
  }
  Weight total = 0;
  for (const auto& [u, steps] : per_user) total = add_weights(total, schema.set_weight(steps, u));
  return total;
}

/// (omega_C, omega_A) of a complete plan.
inline WeightPoint plan_weights(const Schema& schema, const std::vector<int>& assignment) {
  if (static_cast<int>(assignment.size()) != schema.step_count)
    throw Error("incomplete-plan", "plan length differs from step count");
  for (int u : assignment) {
    if (u == kUnassigned) throw Error("incomplete-plan", "plan leaves a step unassigned");
    if (u < 0 || u >= schema.user_count()) throw Error("bad-plan", "user index out of range");
  }
  return {constraint_weight(schema, Pattern::of(assignment)), auth_weight(schema, assignment)};
}

/// Fills in both cached weights.
inline Plan make_plan(const Schema& schema, std::vector<int> assignment) {
  const auto w = plan_weights(schema, assignment);
  return Plan{std::move(assignment), w.cons, w.auth};
}

}  // namespace bowsp
