#pragma once

#include <algorithm>
#include <vector>

#include "epsfront.hpp"
#include "pbb.hpp"
#include "schema.hpp"

namespace bowsp {

/// True when some plan has omega_A = 0 and omega_C = 0.
inline bool wsp_satisfiable(const Schema& schema, BoundedMinimizer& backend) {
  return backend.solve(schema, {0, 0, 0, 0, 0}).has_value();
}

inline bool wsp_satisfiable(const Schema& schema) {
  PatternBackend backend;
  return wsp_satisfiable(schema, backend);
}

/// A hard "at most r users on all steps" constraint.
inline WeightedConstraint all_steps_at_most(int k, int r) {
  std::vector<Weight> table(static_cast<std::size_t>(k), 0);
  for (int m = r + 1; m <= k; ++m) table[static_cast<std::size_t>(m - 1)] = 1;
  return WeightedConstraint::at_most(StepSet::first_n(k), r, std::move(table));
}

struct CmupResult {
  int users = 0;
  int solver_calls = 0;
};

/// Fewest distinct users in a valid plan, by binary search over r with a
/// satisfiability check per probe. The first call checks the instance
/// itself.
inline CmupResult cmup_binary_search(const Schema& schema) {
  PatternBackend backend;
  CmupResult out;
  ++out.solver_calls;
  if (!wsp_satisfiable(schema, backend)) throw Error("cmup-unsatisfiable-base", "the instance has no valid plan");
  int lo = 1;
  int hi = schema.step_count;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    Schema probe = schema;
    probe.constraints.push_back(all_steps_at_most(schema.step_count, mid));
    ++out.solver_calls;
    if (wsp_satisfiable(probe, backend))
      hi = mid;
    else
      lo = mid + 1;
  }
  out.users = lo;
  return out;
}

struct UserCostResult {
  Plan plan;
  Weight cost = 0;
};

/// Valid plan of least total user cost: each user becomes a consultant
/// with cost mu_u on the steps it is authorized for and a prohibitive
/// weight above the total cost elsewhere.
inline UserCostResult min_user_cost(const Schema& schema, const std::vector<Weight>& mu) {
  if (static_cast<int>(mu.size()) != schema.user_count()) throw Error("bad-argument", "one cost per user required");
  Weight total = 0;
  for (Weight c : mu) {
    if (c <= 0) throw Error("bad-argument", "user costs must be positive");
    total = add_weights(total, c);
  }
  Schema costed = schema;
  for (int u = 0; u < schema.user_count(); ++u) {
    StepSet allowed;
    for (int s = 0; s < schema.step_count; ++s)
      if (schema.set_weight(StepSet::single(s), u) == 0) allowed.insert(s);
    costed.users[static_cast<std::size_t>(u)].profile = ConsultantProfile{allowed, mu[static_cast<std::size_t>(u)]};
  }
  costed.auth = ProfileAuth{add_weights(total, 1)};
  PatternBackend backend;
  auto best = backend.solve(costed, {0, 0, total, 0, 0});
  if (!best) throw Error("cmup-unsatisfiable-base", "the instance has no valid plan");
  UserCostResult out{make_plan(schema, best->plan), best->weights.auth};
  return out;
}

struct ResilientPoint {
  WeightPoint weights;
  std::vector<int> plan;
  bool finite = false;           // omega_A below the prohibitive weight
  double expected_missing = 0;   // E[X] = omega_A / weight_scale
  double success_bound = 0;      // max(0, 1 - E[X])
};

/// Per-step weights rho(s, u) for authorized and available users and M
/// otherwise, then the front with omega_C <= budget; each point carries the
/// Markov lower bound on the probability that every step executes.
inline std::vector<ResilientPoint> resilient_plan(const Schema& schema, const AvailabilityModel& model, Weight budget,
                                                  const SearchOptions& opt = {}) {
  if (model.step_count != schema.step_count || model.user_count != schema.user_count())
    throw Error("bad-argument", "availability model size mismatch");
  const int k = schema.step_count;
  const int n = schema.user_count();
  Schema wrapped = schema;
  PerStepLinearAuth weights = per_step_matrix(k, n, 0);
  for (int s = 0; s < k; ++s)
    for (int u = 0; u < n; ++u) set_step_weight(weights, n, s, u, model.step_weight(s, u));
  wrapped.auth = std::move(weights);
  wrapped.bounds = {mul_weights(model.prohibitive, k), budget};
  validate_schema(wrapped);

  std::vector<ResilientPoint> out;
  const auto front = pbb_front(wrapped, opt);
  for (const auto& p : front.points()) {
    ResilientPoint r{p.weights, p.plan, p.weights.auth < model.prohibitive, 0, 0};
    r.expected_missing = static_cast<double>(p.weights.auth) / static_cast<double>(schema.weight_scale);
    if (r.finite) r.success_bound = std::max(0.0, 1.0 - r.expected_missing);
    out.push_back(std::move(r));
  }
  return out;
}

/// The point of least omega_A, or nothing for an empty front.
inline std::optional<ResilientPoint> best_resilient_point(const std::vector<ResilientPoint>& points) {
  if (points.empty()) return std::nullopt;
  return *std::min_element(points.begin(), points.end(),
                           [](const auto& a, const auto& b) { return a.weights.auth < b.weights.auth; });
}

}  // namespace bowsp
