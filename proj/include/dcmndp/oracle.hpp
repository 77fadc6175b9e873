// Brute-force reference solvers and bound checkers for certifying the main
// implementations on small inputs. Deliberately naive and written without
// touching the production algorithms: exhaustive simple-path enumeration
// instead of Floyd-Warshall, full facility-choice enumeration instead of
// inspection + cover search. Size guards are hard errors.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dcmndp/instance.hpp"
#include "dcmndp/solver.hpp"
#include "dcmndp/subproblems.hpp"

namespace dcmndp {

// Three nodes in a triangle, one commodity across it whose demand exceeds
// the small facility: the smallest instance where routing, facility choice
// and the capacity link all interact. Optimal cost is 18 (one large
// facility on the direct edge).
inline Instance make_tri3() {
  Instance inst;
  inst.name = "tri3";
  inst.node_count = 3;
  inst.edges = {Edge{0, 1, {{5, 10}, {10, 18}}}, Edge{1, 2, {{5, 10}, {10, 18}}},
                Edge{0, 2, {{5, 10}, {10, 18}}}};
  inst.commodities = {Commodity{0, 2, 7}};
  return inst;
}

// Exact all-pairs distances by enumerating every simple path.
inline std::vector<std::vector<double>> brute_force_shortest_paths(
    const Instance& inst, const std::vector<double>& weights) {
  if (inst.node_count > 10)
    throw std::invalid_argument("brute_force_shortest_paths: guard n <= 10 exceeded");
  if (weights.size() != inst.edges.size())
    throw std::invalid_argument("brute_force_shortest_paths: weight count mismatch");
  for (double x : weights)
    if (x < 0.0) throw std::invalid_argument("brute_force_shortest_paths: negative weight");

  const std::size_t n = static_cast<std::size_t>(inst.node_count);
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    adj[static_cast<std::size_t>(inst.edges[e].u)].emplace_back(inst.edges[e].v, weights[e]);
    adj[static_cast<std::size_t>(inst.edges[e].v)].emplace_back(inst.edges[e].u, weights[e]);
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, inf));
  std::vector<char> on_path(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    std::function<void(std::size_t, double)> walk = [&](std::size_t at, double len) {
      if (len < dist[s][at]) dist[s][at] = len;
      on_path[at] = 1;
      for (const auto& [to, wt] : adj[at])
        if (!on_path[static_cast<std::size_t>(to)]) walk(static_cast<std::size_t>(to), len + wt);
      on_path[at] = 0;
    };
    walk(s, 0.0);
  }
  return dist;
}

// Exact minimum of sum(cost[e][choice_e]) over all per-edge facility
// choices (including "none") that leave every terminal touched by at least
// one installed edge.
inline double brute_force_ap_y(const Instance& inst, const ReducedCostTable& cost,
                               const TerminalSet& terminals) {
  const std::size_t m = inst.edges.size();
  if (cost.cost.size() != m) throw std::invalid_argument("brute_force_ap_y: cost table mismatch");
  double combos = 1.0;
  for (const Edge& e : inst.edges) {
    combos *= static_cast<double>(e.facilities.size() + 1);
    if (combos > 1e7)
      throw std::invalid_argument("brute_force_ap_y: guard prod(L_e + 1) <= 1e7 exceeded");
  }

  std::vector<std::vector<std::size_t>> incident(terminals.nodes.size());
  for (std::size_t t = 0; t < terminals.nodes.size(); ++t)
    for (std::size_t e = 0; e < m; ++e)
      if (inst.edges[e].touches(terminals.nodes[t])) incident[t].push_back(e);

  std::vector<int> choice(m, -1);  // -1 = no facility
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    bool covered = true;
    for (const auto& edges_at : incident) {
      bool hit = false;
      for (std::size_t e : edges_at)
        if (choice[e] >= 0) { hit = true; break; }
      if (!hit) { covered = false; break; }
    }
    if (covered) {
      double total = 0.0;
      for (std::size_t e = 0; e < m; ++e)
        if (choice[e] >= 0) total += cost.cost[e][static_cast<std::size_t>(choice[e])];
      if (total < best) best = total;
    }
    std::size_t i = 0;  // mixed-radix increment over {-1, 0, .., L_e - 1} per edge
    while (i < m && ++choice[i] == static_cast<int>(inst.edges[i].facilities.size()))
      choice[i++] = -1;
    if (i == m) break;
  }
  return best;
}

// Exact optimum of the full design problem on tiny instances: enumerate
// every facility assignment and accept the cheapest one that can route all
// demands simultaneously. Routability is checked by splitting each demand
// over its simple paths in multiples of the gcd of all demands, so a
// returned cost is always achieved by an explicit routing. +inf if no
// assignment routes everything.
inline double brute_force_opt(const Instance& inst) {
  const std::size_t m = inst.edges.size();
  if (m > 8) throw std::invalid_argument("brute_force_opt: guard m <= 8 exceeded");
  if (inst.commodities.size() > 3)
    throw std::invalid_argument("brute_force_opt: guard K <= 3 exceeded");
  if (inst.commodities.empty()) return 0.0;

  std::int64_t grid = 0;
  for (const Commodity& c : inst.commodities) grid = std::gcd(grid, c.demand);

  const std::size_t n = static_cast<std::size_t>(inst.node_count);
  std::vector<std::vector<std::pair<int, std::size_t>>> adj(n);  // (neighbor, edge)
  for (std::size_t e = 0; e < m; ++e) {
    adj[static_cast<std::size_t>(inst.edges[e].u)].emplace_back(inst.edges[e].v, e);
    adj[static_cast<std::size_t>(inst.edges[e].v)].emplace_back(inst.edges[e].u, e);
  }

  // simple paths per commodity, as edge-index lists
  std::vector<std::vector<std::vector<std::size_t>>> paths(inst.commodities.size());
  for (std::size_t k = 0; k < inst.commodities.size(); ++k) {
    const Commodity& c = inst.commodities[k];
    std::vector<char> on_path(n, 0);
    std::vector<std::size_t> trail;
    std::function<void(int)> walk = [&](int at) {
      if (at == c.sink) {
        paths[k].push_back(trail);
        return;
      }
      on_path[static_cast<std::size_t>(at)] = 1;
      for (const auto& [to, e] : adj[static_cast<std::size_t>(at)]) {
        if (on_path[static_cast<std::size_t>(to)]) continue;
        trail.push_back(e);
        walk(to);
        trail.pop_back();
      }
      on_path[static_cast<std::size_t>(at)] = 0;
    };
    walk(c.source);
  }

  std::vector<std::int64_t> residual(m, 0);
  // Distribute commodity k's remaining demand over paths[k][from..] in
  // multiples of grid, honoring residual capacities; then recurse to k+1.
  std::function<bool(std::size_t)> route_all = [&](std::size_t k) -> bool {
    if (k == inst.commodities.size()) return true;
    std::function<bool(std::size_t, std::int64_t)> split = [&](std::size_t from,
                                                               std::int64_t remaining) -> bool {
      if (remaining == 0) return route_all(k + 1);
      if (from == paths[k].size()) return false;
      std::int64_t room = remaining;
      for (std::size_t e : paths[k][from]) room = std::min(room, residual[e]);
      for (std::int64_t amount = 0; amount <= room; amount += grid) {
        for (std::size_t e : paths[k][from]) residual[e] -= amount;
        if (split(from + 1, remaining - amount)) return true;
        for (std::size_t e : paths[k][from]) residual[e] += amount;
      }
      return false;
    };
    return split(0, inst.commodities[k].demand);
  };

  std::vector<int> choice(m, -1);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    double total = 0.0;
    for (std::size_t e = 0; e < m; ++e)
      if (choice[e] >= 0)
        total += static_cast<double>(inst.edges[e].facilities[static_cast<std::size_t>(choice[e])].cost);
    if (total < best) {
      for (std::size_t e = 0; e < m; ++e)
        residual[e] =
            choice[e] >= 0 ? inst.edges[e].facilities[static_cast<std::size_t>(choice[e])].capacity
                           : 0;
      if (route_all(0)) best = total;
    }
    std::size_t i = 0;
    while (i < m && ++choice[i] == static_cast<int>(inst.edges[i].facilities.size()))
      choice[i++] = -1;
    if (i == m) break;
  }
  return best;
}

// theta is concave with the capacity-violation vector as a supergradient:
// theta(w') <= theta(w) + g(w).(w' - w) must hold for any pair of
// nonnegative multiplier vectors.
inline bool check_supergradient(const Instance& inst, const MultiplierVector& w,
                                const MultiplierVector& w_prime) {
  const DualEvaluation at = evaluate_dual(inst, w);
  const DualEvaluation probe = evaluate_dual(inst, w_prime);
  if (!at.exact_y || !probe.exact_y)
    throw std::logic_error("check_supergradient: facility subproblem was not solved exactly");
  double bound = at.theta;
  for (std::size_t e = 0; e < w.size(); ++e) bound += at.subgradient[e] * (w_prime[e] - w[e]);
  return probe.theta <= bound + 1e-6 * (1.0 + std::abs(at.theta));
}

inline bool check_weak_duality(const SolverReport& report, double opt_or_ub) {
  return report.best_theta <= opt_or_ub + 1e-6;
}

}  // namespace dcmndp
