#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "conbi/rational.hpp"
#include "conbi/simplex.hpp"

namespace conbi {

template <class Cost>
struct Assignment {
  Cost total{};
  std::vector<std::size_t> perm;  // row i is matched to column perm[i]
};

/// Minimum-cost perfect matching on a square cost matrix (shortest augmenting
/// paths with potentials, O(n^3)). Only additions and comparisons are used, so
/// a Rational cost type gives an exact optimum.
template <class Cost>
Assignment<Cost> solve_assignment(const std::vector<std::vector<Cost>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw std::invalid_argument("assignment cost matrix must be square");
  }
  // 1-based with a virtual column 0.
  std::vector<Cost> u(n + 1), v(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<Cost> minv(n + 1);
    std::vector<char> has_min(n + 1, 0), used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      std::size_t j1 = 0;
      Cost delta{};
      bool has_delta = false;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        Cost cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (!has_min[j] || cur < minv[j]) {
          minv[j] = cur;
          has_min[j] = 1;
          way[j] = j0;
        }
        if (!has_delta || minv[j] < delta) {
          delta = minv[j];
          has_delta = true;
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment<Cost> out;
  out.perm.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.perm[match[j] - 1] = j - 1;
  out.total = Cost(0);
  for (std::size_t i = 0; i < n; ++i) out.total += cost[i][out.perm[i]];
  return out;
}

template <class Cost>
struct TransportSolution {
  Cost value{};
  std::vector<std::vector<Rational>> plan;
  int pivots = 0;
};

/// Transportation simplex on a spanning-tree basis.
///
/// Flows are exact rationals; costs may be Rational (exact) or double. The
/// entering cell is the first one in row-major order with negative reduced
/// cost and ties in the ratio test go to the lowest cell index, which is
/// Bland's rule and rules out cycling.
template <class Cost>
TransportSolution<Cost> solve_transport(const std::vector<Rational>& supply, const std::vector<Rational>& demand,
                                        const std::vector<std::vector<Cost>>& cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0) throw std::invalid_argument("empty transportation problem");
  if (cost.size() != m) throw std::invalid_argument("cost rows do not match supply");
  for (const auto& row : cost) {
    if (row.size() != n) throw std::invalid_argument("cost columns do not match demand");
  }
  Rational total_s = 0, total_d = 0;
  for (const auto& s : supply) total_s += s;
  for (const auto& d : demand) total_d += d;
  if (total_s != total_d) throw std::invalid_argument("unbalanced transportation problem");

  std::vector<std::vector<Rational>> flow(m, std::vector<Rational>(n));
  std::vector<std::vector<char>> basic(m, std::vector<char>(n, 0));

  // Northwest corner start; always yields m + n - 1 basic cells.
  {
    std::vector<Rational> s = supply, d = demand;
    std::size_t i = 0, j = 0;
    for (;;) {
      const Rational x = s[i] < d[j] ? s[i] : d[j];
      flow[i][j] = x;
      basic[i][j] = 1;
      s[i] -= x;
      d[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      if ((s[i] == 0 && i < m - 1) || j == n - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  TransportSolution<Cost> sol;
  // Nodes 0..m-1 are rows, m..m+n-1 are columns.
  const std::size_t nodes = m + n;
  std::vector<Cost> pot(nodes);
  std::vector<char> known(nodes);
  std::vector<std::size_t> parent(nodes);

  for (;;) {
    // Potentials: u_i + v_j = c_ij on basic cells.
    std::fill(known.begin(), known.end(), 0);
    pot[0] = Cost(0);
    known[0] = 1;
    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
      const std::size_t a = queue.front();
      queue.pop_front();
      if (a < m) {
        for (std::size_t j = 0; j < n; ++j) {
          if (basic[a][j] && !known[m + j]) {
            pot[m + j] = cost[a][j] - pot[a];
            known[m + j] = 1;
            queue.push_back(m + j);
          }
        }
      } else {
        const std::size_t j = a - m;
        for (std::size_t i = 0; i < m; ++i) {
          if (basic[i][j] && !known[i]) {
            pot[i] = cost[i][j] - pot[a];
            known[i] = 1;
            queue.push_back(i);
          }
        }
      }
    }

    std::size_t ei = m, ej = n;
    for (std::size_t i = 0; i < m && ei == m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (basic[i][j]) continue;
        if (detail::lp_sign(Cost(cost[i][j] - pot[i] - pot[m + j])) < 0) {
          ei = i;
          ej = j;
          break;
        }
      }
    }
    if (ei == m) break;

    // Tree path from column node ej back to row node ei.
    std::fill(known.begin(), known.end(), 0);
    known[ei] = 1;
    parent[ei] = ei;
    queue.assign(1, ei);
    while (!queue.empty() && !known[m + ej]) {
      const std::size_t a = queue.front();
      queue.pop_front();
      if (a < m) {
        for (std::size_t j = 0; j < n; ++j) {
          if (basic[a][j] && !known[m + j]) {
            known[m + j] = 1;
            parent[m + j] = a;
            queue.push_back(m + j);
          }
        }
      } else {
        for (std::size_t i = 0; i < m; ++i) {
          if (basic[i][a - m] && !known[i]) {
            known[i] = 1;
            parent[i] = a;
            queue.push_back(i);
          }
        }
      }
    }
    // Cycle cells: entering (+), then alternating (-, +, ...) along the path.
    std::vector<std::pair<std::size_t, std::size_t>> cells{{ei, ej}};
    for (std::size_t node = m + ej; node != ei; node = parent[node]) {
      const std::size_t up = parent[node];
      cells.push_back(node < m ? std::pair{node, up - m} : std::pair{up, node - m});
    }
    std::size_t leave = 0;
    for (std::size_t k = 1; k < cells.size(); k += 2) {
      const auto [i, j] = cells[k];
      if (leave == 0) {
        leave = k;
        continue;
      }
      const auto [li, lj] = cells[leave];
      if (flow[i][j] < flow[li][lj] || (flow[i][j] == flow[li][lj] && i * n + j < li * n + lj)) leave = k;
    }
    const Rational theta = flow[cells[leave].first][cells[leave].second];
    for (std::size_t k = 0; k < cells.size(); ++k) {
      auto& f = flow[cells[k].first][cells[k].second];
      if (k % 2 == 0) {
        f += theta;
      } else {
        f -= theta;
      }
    }
    basic[ei][ej] = 1;
    basic[cells[leave].first][cells[leave].second] = 0;
    ++sol.pivots;
  }

  sol.plan = std::move(flow);
  sol.value = Cost(0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (sol.plan[i][j] == 0) continue;
      if constexpr (std::is_same_v<Cost, Rational>) {
        sol.value += sol.plan[i][j] * cost[i][j];
      } else {
        sol.value += to_double(sol.plan[i][j]) * cost[i][j];
      }
    }
  }
  return sol;
}

}  // namespace conbi
