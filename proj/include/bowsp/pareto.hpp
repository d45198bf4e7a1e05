#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "schema.hpp"

namespace bowsp {

/// a dominates b: no worse in either weight and strictly smaller in sum.
/// Weight-equal points dominate in neither direction.
constexpr bool dominates(WeightPoint a, WeightPoint b) {
  return a.cons <= b.cons && a.auth <= b.auth && a.cons + a.auth < b.cons + b.auth;
}

struct FrontPoint {
  WeightPoint weights;
  std::vector<int> plan;
};

/// Non-dominated, non-weight-equal points sorted by omega_C ascending, which
/// makes omega_A strictly descending.
class ParetoFront {
 public:
  ParetoFront() = default;
  explicit ParetoFront(Bounds bounds) : bounds_(bounds), bounded_(true) {}

  [[nodiscard]] const std::vector<FrontPoint>& points() const { return points_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] bool empty() const { return points_.empty(); }

  [[nodiscard]] std::vector<WeightPoint> weight_points() const {
    std::vector<WeightPoint> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back(p.weights);
    return out;
  }

  /// True when some stored point is weakly below w in both weights; such a
  /// point either dominates or equals every plan at w or above.
  [[nodiscard]] bool covers(WeightPoint w) const {
    auto it = upper_bound_cons(w.cons);
    if (it == points_.begin()) return false;
    return std::prev(it)->weights.auth <= w.auth;
  }

  /// Would offer() accept a candidate at w?
  [[nodiscard]] bool accepts(WeightPoint w) const {
    if (bounded_ && (w.auth > bounds_.auth || w.cons > bounds_.cons)) return false;
    return !covers(w);
  }

  bool offer(WeightPoint w, std::vector<int> plan) {
    if (!accepts(w)) return false;
    // Dominated points have cons >= w.cons and auth >= w.auth; they form a
    // contiguous run starting at the insertion position.
    auto first = std::lower_bound(points_.begin(), points_.end(), w.cons,
                                  [](const FrontPoint& p, Weight c) { return p.weights.cons < c; });
    auto last = first;
    while (last != points_.end() && last->weights.auth >= w.auth) ++last;
    first = points_.erase(first, last);
    points_.insert(first, FrontPoint{w, std::move(plan)});
    return true;
  }

  bool offer(const Plan& plan) { return offer({plan.constraint_weight, plan.auth_weight}, plan.assignment); }

  void merge(const ParetoFront& other) {
    for (const auto& p : other.points_) offer(p.weights, p.plan);
  }

 private:
  std::vector<FrontPoint>::const_iterator upper_bound_cons(Weight c) const {
    return std::upper_bound(points_.begin(), points_.end(), c,
                            [](Weight v, const FrontPoint& p) { return v < p.weights.cons; });
  }

  std::vector<FrontPoint> points_;
  Bounds bounds_;
  bool bounded_ = false;
};

/// Plan column: space-separated "s<i>:u<j>" pairs, 1-based.
inline std::string plan_text(const std::vector<int>& plan) {
  std::string out;
  for (std::size_t s = 0; s < plan.size(); ++s) {
    if (s != 0) out += ' ';
    out += 's' + std::to_string(s + 1) + ":u" + std::to_string(plan[s] + 1);
  }
  return out;
}

inline std::string front_csv(const ParetoFront& front) {
  std::ostringstream out;
  out << "omega_C,omega_A,plan\n";
  for (const auto& p : front.points()) out << p.weights.cons << ',' << p.weights.auth << ',' << plan_text(p.plan) << '\n';
  return out.str();
}

}  // namespace bowsp
