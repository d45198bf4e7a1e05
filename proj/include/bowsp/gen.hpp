#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "schema.hpp"

namespace bowsp {

/// PCG32 (XSH-RR output over a 64-bit LCG). Each entity of an instance draws
/// from its own stream so results do not depend on generation order.
class Pcg32 {
 public:
  Pcg32(std::uint64_t seed, std::uint64_t stream) : inc_((stream << 1U) | 1U) {
    next();
    state_ += seed;
    next();
  }

  std::uint32_t next() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18U) ^ old) >> 27U);
    const auto rot = static_cast<std::uint32_t>(old >> 59U);
    return (xorshifted >> rot) | (xorshifted << ((32U - rot) & 31U));
  }

  /// Uniform on [lo, hi] by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw Error("bad-argument", "empty range");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span > 0xffffffffULL) throw Error("bad-argument", "range too wide for a 32-bit stream");
    const auto bound = static_cast<std::uint32_t>(span);
    const std::uint32_t threshold = (0U - bound) % bound;
    while (true) {
      const std::uint32_t r = next();
      if (r >= threshold) return lo + static_cast<std::int64_t>(r % bound);
    }
  }

  /// Uniform on the open interval (0, 1).
  double uniform01() { return (static_cast<double>(next()) + 0.5) / 4294967296.0; }

  /// Poisson sample by the product-of-uniforms method.
  int poisson(double lambda) {
    const double limit = std::exp(-lambda);
    int count = 0;
    double product = uniform01();
    while (product > limit) {
      ++count;
      product *= uniform01();
    }
    return count;
  }

  /// Random subset of {0..k-1} of the given size, avoiding `exclude`.
  StepSet subset(int k, int size, StepSet exclude = {}) {
    std::vector<int> pool;
    for (int s = 0; s < k; ++s)
      if (!exclude.contains(s)) pool.push_back(s);
    StepSet out;
    for (int i = 0; i < size && i < static_cast<int>(pool.size()); ++i) {
      const auto j = static_cast<std::size_t>(uniform_int(i, static_cast<std::int64_t>(pool.size()) - 1));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      out.insert(pool[static_cast<std::size_t>(i)]);
    }
    return out;
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_;
};

struct GenParams {
  int k = 10;
  double d = 1.0;  // Poisson mean of |A_u| and consultant |B_u|
  double e = 0.3;  // separation-of-duty density
  std::uint64_t seed = 1;
  // Optional overrides for desk-scale instances; unset means the standard
  // 10k staff, 10 consultants, k + k counting constraints of scope 5.
  std::optional<int> staff;
  std::optional<int> consultants;
  std::optional<int> scope_size;
  std::optional<int> at_most_count;
  std::optional<int> at_least_count;
  Weight prohibitive = kDefaultProhibitive;
  Bounds bounds{1000, 1000};
};

/// Parameters for the small instances used in equivalence checks
/// (k <= 5, n <= 12).
inline GenParams scaled_params(int k, double d, double e, std::uint64_t seed) {
  GenParams p;
  p.k = k;
  p.d = d;
  p.e = e;
  p.seed = seed;
  p.staff = 2 * k;
  p.consultants = 2;
  p.scope_size = std::max(1, std::min(4, k - 1));
  p.at_most_count = std::min(2, k);
  p.at_least_count = std::min(2, k);
  return p;
}

namespace detail {

enum StreamTag : std::uint64_t { kStaffStream = 1, kConsultantStream, kSodStream, kAtMostStream, kAtLeastStream };

inline std::uint64_t stream_id(StreamTag tag, std::uint64_t index) { return (static_cast<std::uint64_t>(tag) << 32U) | index; }

/// Draws `count` distinct scopes of `size` steps; throws after too many
/// collisions.
inline std::vector<StepSet> distinct_scopes(Pcg32& rng, int k, int size, int count) {
  std::set<std::uint64_t> seen;
  std::vector<StepSet> out;
  int failures = 0;
  while (static_cast<int>(out.size()) < count) {
    const StepSet s = rng.subset(k, size);
    if (seen.insert(s.bits()).second) {
      out.push_back(s);
    } else if (++failures > 1000) {
      throw Error("scope-exhaustion", "cannot draw " + std::to_string(count) + " distinct scopes of size " +
                                          std::to_string(size) + " over " + std::to_string(k) + " steps");
    }
  }
  return out;
}

}  // namespace detail

/// Seeded random instance: staff with authorized and fallback steps,
/// consultants, separation-of-duty pairs and at-most / at-least counting
/// constraints.
inline Schema generate(const GenParams& params) {
  const int k = params.k;
  if (k < 2 || k > kMaxSteps) throw Error("bad-argument", "k must be in [2, 64]");
  if (!(params.d > 0)) throw Error("bad-argument", "d must be positive");
  if (params.e < 0 || params.e > 1) throw Error("bad-argument", "e must be in [0, 1]");
  const int staff = params.staff.value_or(10 * k);
  const int consultants = params.consultants.value_or(10);
  const int scope = params.scope_size.value_or(5);
  if (staff < 0 || consultants < 0 || staff + consultants < 1) throw Error("bad-argument", "need at least one user");
  if (scope < 1 || scope > k) throw Error("scope-exhaustion", "counting scope larger than k");
  const Weight big = params.prohibitive;

  Schema s;
  s.step_count = k;
  s.predecessors.assign(static_cast<std::size_t>(k), StepSet());
  s.auth = ProfileAuth{big};
  s.bounds = params.bounds;

  for (int i = 0; i < staff; ++i) {
    Pcg32 rng(params.seed, detail::stream_id(detail::kStaffStream, static_cast<std::uint64_t>(i)));
    const int size = std::min(rng.poisson(params.d), k - 2);
    const StepSet authorized = rng.subset(k, size);
    const StepSet fallback = rng.subset(k, 2, authorized);
    const Weight sigma = rng.uniform_int(5, 15);
    s.users.push_back({"staff" + std::to_string(i + 1), StaffProfile{authorized, fallback, sigma}});
  }
  for (int i = 0; i < consultants; ++i) {
    Pcg32 rng(params.seed, detail::stream_id(detail::kConsultantStream, static_cast<std::uint64_t>(i)));
    const int size = std::min(rng.poisson(params.d), k);
    const StepSet fallback = rng.subset(k, size);
    const Weight sigma = rng.uniform_int(10, 30);
    s.users.push_back({"consultant" + std::to_string(i + 1), ConsultantProfile{fallback, sigma}});
  }

  {
    Pcg32 rng(params.seed, detail::stream_id(detail::kSodStream, 0));
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
    const auto count = static_cast<std::size_t>(std::floor(params.e * static_cast<double>(pairs.size()) + 0.5));
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(pairs.size()) - 1));
      std::swap(pairs[i], pairs[j]);
      s.constraints.push_back(WeightedConstraint::separation_of_duty(pairs[i].first, pairs[i].second, big));
    }
  }

  const int r = std::min(3, scope);
  {
    Pcg32 rng(params.seed, detail::stream_id(detail::kAtMostStream, 0));
    for (StepSet t : detail::distinct_scopes(rng, k, scope, params.at_most_count.value_or(k))) {
      std::vector<Weight> table(static_cast<std::size_t>(scope), 0);
      if (scope >= 4) table[3] = rng.uniform_int(3, 5);
      if (scope >= 5) table[4] = rng.uniform_int(10, 15);
      for (int m = 6; m <= scope; ++m) table[static_cast<std::size_t>(m - 1)] = table[4];
      s.constraints.push_back(WeightedConstraint::at_most(t, r, std::move(table)));
    }
  }
  {
    Pcg32 rng(params.seed, detail::stream_id(detail::kAtLeastStream, 0));
    for (StepSet t : detail::distinct_scopes(rng, k, scope, params.at_least_count.value_or(k))) {
      std::vector<Weight> table(static_cast<std::size_t>(scope), 0);
      table[0] = r > 1 ? big : 0;
      if (r > 2) table[1] = rng.uniform_int(1, 3);
      s.constraints.push_back(WeightedConstraint::at_least(t, r, std::move(table)));
    }
  }
  validate_schema(s);
  return s;
}

inline int pair_count(int k) { return k * (k - 1) / 2; }

/// Instance whose Pareto front has one point per set partition: user u_T
/// per step subset T, separation-of-duty constraint c_i on the i-th pair
/// with weight 2^i, and omega(T, u_T) = half the weight of the pairs cut by
/// T. Every other (set, user) combination is out of reach.
inline Schema worst_case_family(int k) {
  if (k < 1 || k > 10) throw Error("bad-argument", "worst-case family supports 1 <= k <= 10");
  const int pairs = pair_count(k);
  Schema s;
  s.step_count = k;
  s.predecessors.assign(static_cast<std::size_t>(k), StepSet());
  std::vector<std::pair<int, int>> scope;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) scope.emplace_back(a, b);
  for (int i = 1; i <= pairs; ++i) {
    const auto [a, b] = scope[static_cast<std::size_t>(i - 1)];
    s.constraints.push_back(WeightedConstraint::separation_of_duty(a, b, Weight{1} << i));
  }
  ExplicitTableAuth auth;
  auth.default_weight = Weight{1} << (pairs + 2);
  const int users = 1 << k;
  for (int t = 0; t < users; ++t) {
    const StepSet T(static_cast<std::uint64_t>(t));
    std::string name = "u{";
    for (int step : T.elements()) name += (name.size() > 2 ? "," : "") + std::string("s") + std::to_string(step + 1);
    s.users.push_back({name + "}", PlainProfile{}});
    if (T.empty()) continue;
    Weight cut = 0;
    for (int i = 1; i <= pairs; ++i) {
      const auto [a, b] = scope[static_cast<std::size_t>(i - 1)];
      if (T.contains(a) != T.contains(b)) cut += Weight{1} << (i - 1);
    }
    auth.set(t, T, cut);
  }
  s.auth = std::move(auth);
  const Weight total = (Weight{1} << (pairs + 1)) - 2;
  s.bounds = {total, total};
  validate_schema(s);
  return s;
}

/// Sum of all constraint weights of worst_case_family(k).
inline Weight worst_case_total(int k) { return (Weight{1} << (pair_count(k) + 1)) - 2; }

namespace detail {

/// Steps each purchase-order user may perform (0-based).
inline std::vector<StepSet> purchase_order_authorizations() {
  return {StepSet::of({0, 2, 3}), StepSet::of({0, 2, 3}), StepSet::of({0, 2}), StepSet::of({0, 2}),
          StepSet::of({0, 2}),    StepSet::of({1, 2, 4}), StepSet::of({2, 3, 4}), StepSet::of({4, 5})};
}

inline std::vector<std::pair<int, int>> purchase_order_order() { return {{0, 1}, {1, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 5}}; }

}  // namespace detail

/// Six-step purchase-order workflow with eight users: create order (s1),
/// approve (s2), sign and countersign the goods received note (s3, s5),
/// create payment (s4) and approve payment (s6).
inline Schema purchase_order_fixture() {
  Schema s;
  s.step_count = 6;
  s.predecessors = close_order(6, detail::purchase_order_order());
  const auto auth = detail::purchase_order_authorizations();
  PerStepLinearAuth weights = per_step_matrix(6, 8, kDefaultProhibitive);
  for (int u = 0; u < 8; ++u) {
    s.users.push_back({"u" + std::to_string(u + 1), PlainProfile{}});
    auth[static_cast<std::size_t>(u)].for_each([&](int st) { set_step_weight(weights, 8, st, u, 0); });
  }
  s.auth = std::move(weights);
  s.constraints = {WeightedConstraint::separation_of_duty(0, 1, kDefaultProhibitive),
                   WeightedConstraint::binding_of_duty(0, 2, kDefaultProhibitive),
                   WeightedConstraint::separation_of_duty(2, 4, kDefaultProhibitive)};
  s.bounds = {1000, 1000};
  validate_schema(s);
  return s;
}

/// Drops the listed users (0-based).
inline Schema remove_users(const Schema& schema, const std::vector<int>& drop) {
  std::vector<int> keep;
  for (int u = 0; u < schema.user_count(); ++u)
    if (std::find(drop.begin(), drop.end(), u) == drop.end()) keep.push_back(u);
  return select_users(schema, keep);
}

/// The purchase order with s5 and s6 separated and u6, u7 gone: no valid plan.
inline Schema purchase_order_unsatisfiable() {
  Schema s = remove_users(purchase_order_fixture(), {5, 6});
  s.constraints.push_back(WeightedConstraint::separation_of_duty(4, 5, kDefaultProhibitive));
  validate_schema(s);
  return s;
}

/// Availability model for the purchase order with per-user unavailability
/// probabilities (in hundredths) and everyone available.
inline AvailabilityModel purchase_order_availability() {
  const std::vector<Weight> rho = {1, 6, 3, 5, 7, 5, 6, 1};
  AvailabilityModel m;
  m.step_count = 6;
  m.user_count = 8;
  m.prohibitive = kDefaultProhibitive;
  m.authorized.assign(48, 0);
  m.available.assign(48, 1);
  m.rho.assign(48, 0);
  const auto auth = detail::purchase_order_authorizations();
  for (int st = 0; st < 6; ++st)
    for (int u = 0; u < 8; ++u) {
      const auto i = m.at(st, u);
      m.authorized[i] = auth[static_cast<std::size_t>(u)].contains(st) ? 1 : 0;
      m.rho[i] = rho[static_cast<std::size_t>(u)];
    }
  return m;
}

/// The purchase order used for availability planning: every constraint
/// (including an extra separation of s1 and s4) costs 1 to break, weights
/// are in hundredths.
inline Schema purchase_order_availability_schema() {
  Schema s = purchase_order_fixture();
  s.constraints = {WeightedConstraint::separation_of_duty(0, 1, 1), WeightedConstraint::binding_of_duty(0, 2, 1),
                   WeightedConstraint::separation_of_duty(2, 4, 1), WeightedConstraint::separation_of_duty(0, 3, 1)};
  s.weight_scale = 100;
  validate_schema(s);
  return s;
}

}  // namespace bowsp
