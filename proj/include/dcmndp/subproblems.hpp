// Lagrangian subproblems obtained by dualizing the edge capacity
// constraints with multipliers w >= 0:
//   - facility selection under reduced costs c[e][l] = f - w*u, at most one
//     facility per edge, strengthened so every commodity endpoint keeps at
//     least one incident installed edge;
//   - routing, which reduces to all-pairs shortest paths under weights w
//     with each commodity's demand concentrated on one shortest path.
// The dual value theta(w) = theta_y + theta_z is a lower bound on the
// optimum for every w >= 0.
#pragma once

#include <bit>
#include <cstdint>
#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

#include "dcmndp/instance.hpp"
#include "dcmndp/shortest_paths.hpp"

namespace dcmndp {

using MultiplierVector = std::vector<double>;

inline MultiplierVector initial_multipliers(std::size_t edge_count) {
  return MultiplierVector(edge_count, 0.0);
}

struct ReducedCostTable {
  std::vector<std::vector<double>> cost;  // cost[e][l]
};

inline ReducedCostTable reduced_facility_costs(const Instance& inst, const MultiplierVector& w) {
  if (w.size() != inst.edges.size())
    throw std::invalid_argument("multiplier vector length mismatch");
  ReducedCostTable table;
  table.cost.resize(inst.edges.size());
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const Edge& ed = inst.edges[e];
    table.cost[e].reserve(ed.facilities.size());
    for (const FacilityOption& fac : ed.facilities)
      table.cost[e].push_back(static_cast<double>(fac.cost) -
                              w[e] * static_cast<double>(fac.capacity));
  }
  return table;
}

struct FacilitySelection {
  std::vector<int> choice;  // facility index per edge, -1 = none installed
};

struct ApYResult {
  double theta_y = 0.0;
  FacilitySelection selection;
  bool exact = true;  // false when the search budget ran out and a bound was returned
};

struct ApZResult {
  double theta_z = 0.0;
  std::vector<std::vector<int>> routing;  // per commodity, edge ids of its path
};

inline ApZResult solve_ap_z(const Instance& inst, const ShortestPathTable& sp) {
  ApZResult out;
  out.routing.reserve(inst.commodities.size());
  for (const Commodity& c : inst.commodities) {
    out.theta_z += static_cast<double>(c.demand) * sp.distance(c.source, c.sink);
    out.routing.push_back(sp.path(c.source, c.sink));
  }
  return out;
}

// Facility selection with terminal covering. Inspection installs the best
// facility on every edge whose best reduced cost is strictly negative;
// terminals left uncovered are then covered by a minimum-cost edge set
// (edge cost = best reduced cost, >= 0), found by best-first search with
// the admissible bound sum(min incident cost)/2 (an edge covers at most
// two terminals). If the expansion budget runs out the result is the root
// bound, still a valid lower bound, flagged exact=false.
inline ApYResult solve_ap_y(const Instance& inst, const ReducedCostTable& c,
                            const TerminalSet& terminals,
                            std::uint64_t node_budget = 1'000'000) {
  const std::size_t m = inst.edges.size();
  if (c.cost.size() != m) throw std::invalid_argument("reduced cost table size mismatch");

  ApYResult out;
  out.selection.choice.assign(m, -1);

  std::vector<double> cstar(m, 0.0);
  std::vector<int> lstar(m, 0);
  for (std::size_t e = 0; e < m; ++e) {
    if (c.cost[e].size() != inst.edges[e].facilities.size())
      throw std::invalid_argument("reduced cost table size mismatch");
    cstar[e] = c.cost[e][0];
    for (std::size_t l = 1; l < c.cost[e].size(); ++l) {
      if (c.cost[e][l] < cstar[e]) {
        cstar[e] = c.cost[e][l];
        lstar[e] = static_cast<int>(l);
      }
    }
    if (cstar[e] < 0.0) {  // strict: a zero-cost facility is never forced in
      out.selection.choice[e] = lstar[e];
      out.theta_y += cstar[e];
    }
  }
  if (terminals.empty()) return out;

  std::vector<char> covered(static_cast<std::size_t>(inst.node_count), 0);
  for (std::size_t e = 0; e < m; ++e) {
    if (out.selection.choice[e] >= 0) {
      covered[static_cast<std::size_t>(inst.edges[e].u)] = 1;
      covered[static_cast<std::size_t>(inst.edges[e].v)] = 1;
    }
  }
  std::vector<int> open;  // uncovered terminal nodes, ascending
  for (int v : terminals.nodes)
    if (!covered[static_cast<std::size_t>(v)]) open.push_back(v);
  if (open.empty()) return out;

  const std::size_t nt = open.size();
  std::vector<int> tindex(static_cast<std::size_t>(inst.node_count), -1);
  for (std::size_t i = 0; i < nt; ++i) tindex[static_cast<std::size_t>(open[i])] = static_cast<int>(i);

  // candidate edges per uncovered terminal (edges not already installed)
  std::vector<std::vector<int>> incident(nt);
  for (std::size_t e = 0; e < m; ++e) {
    if (out.selection.choice[e] >= 0) continue;
    for (int v : {inst.edges[e].u, inst.edges[e].v}) {
      const int ti = tindex[static_cast<std::size_t>(v)];
      if (ti >= 0) incident[static_cast<std::size_t>(ti)].push_back(static_cast<int>(e));
    }
  }
  std::vector<double> min_cost(nt, 0.0);
  std::vector<int> min_edge(nt, -1);
  for (std::size_t i = 0; i < nt; ++i) {
    if (incident[i].empty())
      throw std::logic_error("terminal node without an uninstalled incident edge");
    min_edge[i] = incident[i][0];
    min_cost[i] = cstar[static_cast<std::size_t>(incident[i][0])];
    for (int e : incident[i]) {
      if (cstar[static_cast<std::size_t>(e)] < min_cost[i]) {
        min_cost[i] = cstar[static_cast<std::size_t>(e)];
        min_edge[i] = e;
      }
    }
  }

  using Mask = std::vector<std::uint64_t>;
  const std::size_t words = (nt + 63) / 64;
  Mask root(words, 0);
  for (std::size_t i = 0; i < nt; ++i) root[i / 64] |= std::uint64_t{1} << (i % 64);

  auto heuristic = [&](const Mask& mask) {
    double h = 0.0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t bits = mask[w];
      while (bits) {
        const std::size_t i = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
        h += min_cost[i];
        bits &= bits - 1;
      }
    }
    return 0.5 * h;
  };
  auto clear_endpoints = [&](Mask& mask, int e) {
    for (int v : {inst.edges[static_cast<std::size_t>(e)].u,
                  inst.edges[static_cast<std::size_t>(e)].v}) {
      const int ti = tindex[static_cast<std::size_t>(v)];
      if (ti >= 0) mask[static_cast<std::size_t>(ti) / 64] &=
          ~(std::uint64_t{1} << (static_cast<std::size_t>(ti) % 64));
    }
  };

  struct Node {
    double g;
    int parent;
    int edge;
  };
  struct Entry {
    double f;
    std::uint64_t seq;
    int node;
    bool operator>(const Entry& o) const { return f != o.f ? f > o.f : seq > o.seq; }
  };
  std::vector<Node> arena;
  arena.push_back({0.0, -1, -1});
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> frontier;
  std::uint64_t seq = 0;
  frontier.push({heuristic(root), seq++, 0});
  std::set<Mask> closed;

  auto rebuild_mask = [&](int node) {
    Mask mask = root;
    for (int at = node; at > 0; at = arena[static_cast<std::size_t>(at)].parent)
      clear_endpoints(mask, arena[static_cast<std::size_t>(at)].edge);
    return mask;
  };

  std::uint64_t expansions = 0;
  while (!frontier.empty()) {
    if (expansions++ >= node_budget) {
      // valid lower bound; greedily complete the selection so the cover
      // constraints still hold
      out.theta_y += heuristic(root);
      for (std::size_t i = 0; i < nt; ++i) {
        if (!covered[static_cast<std::size_t>(open[i])]) {
          const int e = min_edge[i];
          out.selection.choice[static_cast<std::size_t>(e)] = lstar[static_cast<std::size_t>(e)];
          covered[static_cast<std::size_t>(inst.edges[static_cast<std::size_t>(e)].u)] = 1;
          covered[static_cast<std::size_t>(inst.edges[static_cast<std::size_t>(e)].v)] = 1;
        }
      }
      out.exact = false;
      return out;
    }
    const Entry top = frontier.top();
    frontier.pop();
    Mask mask = rebuild_mask(top.node);

    bool done = true;
    for (std::uint64_t w : mask)
      if (w) { done = false; break; }
    if (done) {
      out.theta_y += arena[static_cast<std::size_t>(top.node)].g;
      for (int at = top.node; at > 0; at = arena[static_cast<std::size_t>(at)].parent) {
        const int e = arena[static_cast<std::size_t>(at)].edge;
        out.selection.choice[static_cast<std::size_t>(e)] = lstar[static_cast<std::size_t>(e)];
      }
      return out;
    }
    if (!closed.insert(mask).second) continue;

    // branch on the uncovered terminal with the fewest incident edges
    std::size_t branch = nt;
    for (std::size_t i = 0; i < nt; ++i) {
      if (!(mask[i / 64] >> (i % 64) & 1)) continue;
      if (branch == nt || incident[i].size() < incident[branch].size()) branch = i;
    }

    // an edge whose far endpoint is not an uncovered terminal is dominated
    // by the cheapest incident edge, so only those candidates are expanded
    const int v = open[branch];
    for (int e : incident[branch]) {
      const int far = inst.edges[static_cast<std::size_t>(e)].other(v);
      const int fi = tindex[static_cast<std::size_t>(far)];
      const bool far_open = fi >= 0 && (mask[static_cast<std::size_t>(fi) / 64] >>
                                        (static_cast<std::size_t>(fi) % 64) & 1);
      if (!far_open && e != min_edge[branch]) continue;
      Mask child = mask;
      clear_endpoints(child, e);
      const double g = arena[static_cast<std::size_t>(top.node)].g +
                       cstar[static_cast<std::size_t>(e)];
      arena.push_back({g, top.node, e});
      frontier.push({g + heuristic(child), seq++, static_cast<int>(arena.size()) - 1});
    }
  }
  throw std::logic_error("terminal cover search exhausted without a solution");
}

inline std::vector<double> compute_subgradient(const Instance& inst,
                                               const std::vector<std::vector<int>>& routing,
                                               const FacilitySelection& selection) {
  std::vector<double> g(inst.edges.size(), 0.0);
  for (std::size_t k = 0; k < routing.size(); ++k) {
    const double demand = static_cast<double>(inst.commodities[k].demand);
    for (int e : routing[k]) g[static_cast<std::size_t>(e)] += demand;
  }
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const int l = selection.choice[e];
    if (l >= 0)
      g[e] -= static_cast<double>(inst.edges[e].facilities[static_cast<std::size_t>(l)].capacity);
  }
  return g;
}

struct DualEvaluation {
  double theta = 0.0;
  double theta_y = 0.0;
  double theta_z = 0.0;
  FacilitySelection selection;
  std::vector<std::vector<int>> routing;
  std::vector<double> subgradient;
  bool exact_y = true;
};

inline DualEvaluation evaluate_dual(const Instance& inst, const MultiplierVector& w,
                                    const TerminalSet& terminals,
                                    std::uint64_t node_budget = 1'000'000) {
  const ReducedCostTable costs = reduced_facility_costs(inst, w);
  const ShortestPathTable sp = all_pairs_shortest_paths(inst, w);
  ApZResult apz = solve_ap_z(inst, sp);
  ApYResult apy = solve_ap_y(inst, costs, terminals, node_budget);

  DualEvaluation ev;
  ev.theta_y = apy.theta_y;
  ev.theta_z = apz.theta_z;
  ev.theta = apy.theta_y + apz.theta_z;
  ev.selection = std::move(apy.selection);
  ev.routing = std::move(apz.routing);
  ev.exact_y = apy.exact;
  ev.subgradient = compute_subgradient(inst, ev.routing, ev.selection);
  return ev;
}

inline DualEvaluation evaluate_dual(const Instance& inst, const MultiplierVector& w,
                                    std::uint64_t node_budget = 1'000'000) {
  return evaluate_dual(inst, w, terminal_set(inst), node_budget);
}

}  // namespace dcmndp
