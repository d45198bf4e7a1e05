#pragma once

#include <limits>
#include <vector>

#include "schema.hpp"

namespace bowsp {

/// cost[q][u] = omega(T_q, u) for p blocks and n users, row-major.
struct BlockUserCostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Weight> cost;

  BlockUserCostMatrix() = default;
  BlockUserCostMatrix(int p, int n) : rows(p), cols(n), cost(static_cast<std::size_t>(p) * static_cast<std::size_t>(n), 0) {}

  [[nodiscard]] Weight at(int q, int u) const { return cost[static_cast<std::size_t>(q * cols + u)]; }
  Weight& at(int q, int u) { return cost[static_cast<std::size_t>(q * cols + u)]; }

  static BlockUserCostMatrix of(const Schema& schema, const std::vector<StepSet>& blocks) {
    BlockUserCostMatrix m(static_cast<int>(blocks.size()), schema.user_count());
    for (int q = 0; q < m.rows; ++q)
      for (int u = 0; u < m.cols; ++u) m.at(q, u) = schema.set_weight(blocks[static_cast<std::size_t>(q)], u);
    return m;
  }
};

struct BlockAssignment {
  std::vector<int> users;  // users[q] = user of block q
  Weight total = 0;
};

namespace detail {

struct HungarianState {
  Weight total = 0;
  std::vector<int> row_to_col;
  std::vector<Weight> row_potential;
  std::vector<Weight> col_potential;
};

/// Rectangular Hungarian method (rows <= cols) with potentials; O(p^2 n).
inline HungarianState hungarian(const BlockUserCostMatrix& m) {
  const int p = m.rows;
  const int n = m.cols;
  constexpr Weight inf = std::numeric_limits<Weight>::max() / 4;
  std::vector<Weight> u(static_cast<std::size_t>(p) + 1, 0);
  std::vector<Weight> v(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // column -> row (1-based), 0 = free
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Weight> minv(static_cast<std::size_t>(n) + 1);
  std::vector<char> used(static_cast<std::size_t>(n) + 1);

  for (int i = 1; i <= p; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      Weight delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const Weight cur = m.at(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  HungarianState st;
  st.row_to_col.assign(static_cast<std::size_t>(p), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] != 0) st.row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  for (int i = 0; i < p; ++i) st.total = add_weights(st.total, m.at(i, st.row_to_col[static_cast<std::size_t>(i)]));
  st.row_potential.assign(u.begin() + 1, u.end());
  st.col_potential.assign(v.begin() + 1, v.end());
  return st;
}

inline void check_shape(const BlockUserCostMatrix& m) {
  if (m.rows > m.cols) throw Error("more-blocks-than-users", std::to_string(m.rows) + " blocks but " + std::to_string(m.cols) + " users");
}

}  // namespace detail

/// Minimum total of an injective block-to-user assignment.
inline Weight min_assignment_value(const BlockUserCostMatrix& m) {
  detail::check_shape(m);
  if (m.rows == 0) return 0;
  return detail::hungarian(m).total;
}

/// Minimum-weight injective assignment; among optima, the lexicographically
/// smallest user vector.
inline BlockAssignment min_weight_block_assignment(const BlockUserCostMatrix& m) {
  detail::check_shape(m);
  BlockAssignment out;
  if (m.rows == 0) return out;
  const auto st = detail::hungarian(m);
  out.total = st.total;

  // Every optimal assignment uses only edges that are tight for the optimal
  // duals, so rows are fixed in order trying tight columns ascending and
  // confirming the residual problem still reaches the optimum.
  std::vector<char> taken(static_cast<std::size_t>(m.cols), 0);
  Weight fixed = 0;
  for (int q = 0; q < m.rows; ++q) {
    int chosen = -1;
    for (int u = 0; u < m.cols && chosen < 0; ++u) {
      if (taken[static_cast<std::size_t>(u)]) continue;
      if (m.at(q, u) - st.row_potential[static_cast<std::size_t>(q)] - st.col_potential[static_cast<std::size_t>(u)] != 0) continue;
      const int rest_rows = m.rows - q - 1;
      BlockUserCostMatrix rest(rest_rows, m.cols - q - 1);
      std::vector<int> cols;
      for (int w = 0; w < m.cols; ++w)
        if (!taken[static_cast<std::size_t>(w)] && w != u) cols.push_back(w);
      for (int r = 0; r < rest_rows; ++r)
        for (int col = 0; col < rest.cols; ++col) rest.at(r, col) = m.at(q + 1 + r, cols[static_cast<std::size_t>(col)]);
      const Weight rest_value = rest_rows == 0 ? 0 : detail::hungarian(rest).total;
      if (fixed + m.at(q, u) + rest_value == out.total) chosen = u;
    }
    if (chosen < 0) throw Error("internal", "lexicographic tie-break lost the optimum");
    taken[static_cast<std::size_t>(chosen)] = 1;
    fixed += m.at(q, chosen);
    out.users.push_back(chosen);
  }
  return out;
}

}  // namespace bowsp
