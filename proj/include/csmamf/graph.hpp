#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "csmamf/errors.hpp"
#include "csmamf/lp.hpp"

namespace csmamf {

/// Class-level conflict graph: two classes joined by an edge cannot transmit
/// at the same time. Classes are 0-indexed everywhere.
struct InterferenceGraph {
  int num_classes = 0;
  std::vector<std::pair<int, int>> edges;  // normalized a < b, deduplicated

  InterferenceGraph() = default;
  InterferenceGraph(int classes, std::vector<std::pair<int, int>> edge_list)
      : num_classes(classes) {
    if (classes < 1) throw ConfigError("interference graph needs at least one class");
    for (auto [a, b] : edge_list) {
      if (a == b) throw ConfigError("interference graph: self-loop on class " + std::to_string(a));
      if (a < 0 || b < 0 || a >= classes || b >= classes)
        throw ConfigError("interference graph: edge endpoint out of range");
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  static InterferenceGraph complete(int classes) {
    std::vector<std::pair<int, int>> e;
    for (int a = 0; a < classes; ++a)
      for (int b = a + 1; b < classes; ++b) e.emplace_back(a, b);
    return InterferenceGraph(classes, std::move(e));
  }

  static InterferenceGraph edgeless(int classes) { return InterferenceGraph(classes, {}); }

  bool is_complete() const {
    return static_cast<long>(edges.size()) ==
           static_cast<long>(num_classes) * (num_classes - 1) / 2;
  }

  // neighbor_masks()[c] has bit d set iff (c,d) is an edge.
  std::vector<std::uint32_t> neighbor_masks() const {
    std::vector<std::uint32_t> mask(num_classes, 0);
    for (auto [a, b] : edges) {
      mask[a] |= 1u << b;
      mask[b] |= 1u << a;
    }
    return mask;
  }
};

/// An activity state is a bitmask over classes (bit c set = a class-c node is
/// transmitting); feasible states are exactly the independent sets of the
/// interference graph.
using ActivityMask = std::uint32_t;

inline std::string activity_state_string(ActivityMask mask, int num_classes) {
  std::string s(num_classes, '0');
  for (int c = 0; c < num_classes; ++c)
    if (mask & (1u << c)) s[c] = '1';
  return s;
}

/// Enumerated feasible activity-state space with the per-class blocking and
/// active index sets, plus transition tables used by the simulator.
struct ActivitySpace {
  int num_classes = 0;
  std::vector<ActivityMask> states;             // lexicographic on the binary vector
  std::vector<std::uint32_t> neighbor_mask;     // per class
  std::vector<std::vector<int>> omega_minus;    // states where class c may back off
  std::vector<std::vector<int>> omega_plus;     // states where class c is transmitting
  std::vector<std::uint32_t> backoff_allowed;   // per state: bitmask of classes with state in omega_minus
  std::vector<std::vector<int>> up;             // up[s][c]: index of state|1<<c, -1 if not applicable
  std::vector<std::vector<int>> down;           // down[s][c]: index of state&~(1<<c), -1 if c inactive
  int zero_state = 0;

  std::size_t size() const { return states.size(); }
  bool active(int state_index, int c) const { return states[state_index] & (1u << c); }

  // True iff the underlying graph is complete (only singleton sets feasible).
  bool complete_graph() const {
    return states.size() == static_cast<std::size_t>(num_classes) + 1;
  }
};

namespace detail {

inline void enumerate_rec(int c, int num_classes, ActivityMask current,
                          const std::vector<std::uint32_t>& nb,
                          std::vector<ActivityMask>& out) {
  if (c == num_classes) {
    out.push_back(current);
    return;
  }
  enumerate_rec(c + 1, num_classes, current, nb, out);  // class c idle first: lexicographic
  if ((nb[c] & current) == 0)
    enumerate_rec(c + 1, num_classes, current | (1u << c), nb, out);
}

}  // namespace detail

/// Enumerates every independent set of the graph in lexicographic order of
/// the binary occupancy vector, by backtracking with neighbor pruning.
inline ActivitySpace enumerate_feasible_states(const InterferenceGraph& graph,
                                               int enumeration_cap = 20) {
  if (graph.num_classes < 1) throw ConfigError("graph must have at least one class");
  if (graph.num_classes > enumeration_cap)
    throw ConfigError("state space too large: " + std::to_string(graph.num_classes) +
                      " classes exceeds the enumeration cap of " + std::to_string(enumeration_cap));

  ActivitySpace space;
  space.num_classes = graph.num_classes;
  space.neighbor_mask = graph.neighbor_masks();
  detail::enumerate_rec(0, graph.num_classes, 0, space.neighbor_mask, space.states);

  const int C = graph.num_classes;
  const int S = static_cast<int>(space.states.size());
  std::vector<int> index_of(std::size_t{1} << C, -1);
  for (int s = 0; s < S; ++s) index_of[space.states[s]] = s;

  space.omega_minus.assign(C, {});
  space.omega_plus.assign(C, {});
  space.backoff_allowed.assign(S, 0);
  space.up.assign(S, std::vector<int>(C, -1));
  space.down.assign(S, std::vector<int>(C, -1));

  for (int s = 0; s < S; ++s) {
    const ActivityMask w = space.states[s];
    if (w == 0) space.zero_state = s;
    for (int c = 0; c < C; ++c) {
      const ActivityMask bit = 1u << c;
      if (w & bit) {
        space.omega_plus[c].push_back(s);
        space.down[s][c] = index_of[w & ~bit];
      } else if ((w & space.neighbor_mask[c]) == 0) {
        space.omega_minus[c].push_back(s);
        space.backoff_allowed[s] |= bit;
        space.up[s][c] = index_of[w | bit];
      }
    }
  }
  return space;
}

enum class RegionPosition { inside_interior, boundary, outside };

struct CapacityResult {
  RegionPosition position;
  double margin;  // 1 - min total schedule mass; negative when outside
};

/// Decides membership of gamma in the class-capacity region by solving
///   min sum_w a_w  s.t.  sum_w a_w * w = gamma,  a >= 0
/// over the schedule variables; gamma is inside iff the optimum is <= 1 and
/// strictly interior iff the margin 1 - optimum exceeds the tolerance.
inline CapacityResult capacity_region_contains(const ActivitySpace& space,
                                               const std::vector<double>& gamma,
                                               double tol = 1e-9) {
  const int C = space.num_classes;
  if (static_cast<int>(gamma.size()) != C)
    throw ConfigError("capacity query: gamma has wrong length");
  for (double g : gamma)
    if (!(g >= 0.0)) throw ConfigError("capacity query: gamma must be nonnegative");

  const std::size_t S = space.size();
  std::vector<std::vector<double>> a(C, std::vector<double>(S, 0.0));
  for (std::size_t s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c)
      if (space.states[s] & (1u << c)) a[c][s] = 1.0;
  std::vector<double> cost(S, 1.0);

  LpResult lp = SimplexSolver().solve(std::move(a), gamma, std::move(cost));
  if (!lp.feasible) return {RegionPosition::outside, -1.0};

  const double margin = 1.0 - lp.objective;
  if (margin > tol) return {RegionPosition::inside_interior, margin};
  if (margin < -tol) return {RegionPosition::outside, margin};
  return {RegionPosition::boundary, margin};
}

}  // namespace csmamf
