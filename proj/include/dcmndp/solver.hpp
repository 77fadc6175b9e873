// Dual ascent on the Lagrangian dual by deflected subgradient iterations.
//
// Direction variants (sg1-sg5 deflect the raw subgradient g by sigma times
// the previous direction, sg6 blends successive subgradients):
//   sg1  sigma = 0                                   (plain subgradient)
//   sg2  sigma = -1.5 g.d_prev / |d_prev|^2 when g.d_prev < 0, else 0
//   sg3  sigma = |g| / |d_prev|            when g.d_prev < 0, else 0
//   sg4  sigma = 0.8
//   sg5  sigma = |g| / |d_prev|                      (average direction)
//   sg6  d = alpha g + (1 - alpha) g_prev
//
// Step length: lambda = beta (UB - theta) / |d|^2, with beta scheduled by
//   r1  beta halves whenever theta fails to improve on the best value so far
//   r2  beta halves every 2n iterations
//   r3  beta halves every 2m iterations
//   r4  beta = 0.01   r5  beta = 0.1   r6  beta = 1.99
// Halving rules floor beta at 1e-12, low enough that floored steps move
// theta by less than the stall tolerance (a noticeable floor keeps nudging
// theta past the improvement test forever and the run only ends at the
// iteration cap).
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dcmndp/instance.hpp"
#include "dcmndp/shortest_paths.hpp"
#include "dcmndp/subproblems.hpp"

namespace dcmndp {

enum class Variant { sg1, sg2, sg3, sg4, sg5, sg6 };
enum class StepTag { r1, r2, r3, r4, r5, r6 };

struct DirectionRule {
  Variant variant = Variant::sg1;
  double alpha = 0.7;  // sg6 blend weight, in (0, 1]
};

struct StepRule {
  StepTag tag = StepTag::r1;
  double beta = 2.0;  // current value
  long period = 0;    // halving period, r2/r3 only
};

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::sg1: return "sg1";
    case Variant::sg2: return "sg2";
    case Variant::sg3: return "sg3";
    case Variant::sg4: return "sg4";
    case Variant::sg5: return "sg5";
    case Variant::sg6: return "sg6";
  }
  return "?";
}

inline const char* to_string(StepTag r) {
  switch (r) {
    case StepTag::r1: return "r1";
    case StepTag::r2: return "r2";
    case StepTag::r3: return "r3";
    case StepTag::r4: return "r4";
    case StepTag::r5: return "r5";
    case StepTag::r6: return "r6";
  }
  return "?";
}

inline std::optional<Variant> variant_from_string(std::string_view s) {
  for (Variant v : {Variant::sg1, Variant::sg2, Variant::sg3, Variant::sg4, Variant::sg5,
                    Variant::sg6})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

inline std::optional<StepTag> rule_from_string(std::string_view s) {
  for (StepTag r : {StepTag::r1, StepTag::r2, StepTag::r3, StepTag::r4, StepTag::r5, StepTag::r6})
    if (s == to_string(r)) return r;
  return std::nullopt;
}

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const std::vector<double>& a) { return dot(a, a); }

inline double norm(const std::vector<double>& a) { return std::sqrt(norm_sq(a)); }

}  // namespace detail

// Deflection coefficient sigma for sg1-sg5; sg6 combines subgradients
// directly and has no sigma.
inline double deflection_sigma(const DirectionRule& rule, const std::vector<double>& g,
                               const std::vector<double>& d_prev) {
  const double dn2 = detail::norm_sq(d_prev);
  if (dn2 <= 0.0) throw std::invalid_argument("deflection_sigma: zero previous direction");
  switch (rule.variant) {
    case Variant::sg1:
      return 0.0;
    case Variant::sg2: {
      const double gd = detail::dot(g, d_prev);
      return gd < 0.0 ? -1.5 * gd / dn2 : 0.0;
    }
    case Variant::sg3: {
      const double gd = detail::dot(g, d_prev);
      return gd < 0.0 ? detail::norm(g) / std::sqrt(dn2) : 0.0;
    }
    case Variant::sg4:
      return 0.8;
    case Variant::sg5:
      return detail::norm(g) / std::sqrt(dn2);
    case Variant::sg6:
      break;
  }
  throw std::invalid_argument("deflection_sigma: sg6 has no sigma");
}

inline std::vector<double> direction(const DirectionRule& rule, long q,
                                     const std::vector<double>& g,
                                     const std::vector<double>& g_prev,
                                     const std::vector<double>& d_prev,
                                     double eps_dir = 1e-6) {
  if (q == 0) return g;
  std::vector<double> d(g.size());
  if (rule.variant == Variant::sg6) {
    for (std::size_t i = 0; i < g.size(); ++i)
      d[i] = rule.alpha * g[i] + (1.0 - rule.alpha) * g_prev[i];
  } else {
    const double sigma = deflection_sigma(rule, g, d_prev);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] + sigma * d_prev[i];
  }
  if (detail::norm(d) < eps_dir) return g;
  return d;
}

inline double step_length(double beta, double upper_bound, double theta,
                          const std::vector<double>& d) {
  const double dn2 = detail::norm_sq(d);
  if (dn2 <= 0.0) throw std::invalid_argument("step_length: zero direction");
  return beta * (upper_bound - theta) / dn2;
}

inline StepRule make_step_rule(StepTag tag, int node_count, std::size_t edge_count) {
  StepRule rule;
  rule.tag = tag;
  switch (tag) {
    case StepTag::r1: rule.beta = 2.0; break;
    case StepTag::r2: rule.beta = 2.0; rule.period = 2L * node_count; break;
    case StepTag::r3: rule.beta = 2.0; rule.period = 2L * static_cast<long>(edge_count); break;
    case StepTag::r4: rule.beta = 0.01; break;
    case StepTag::r5: rule.beta = 0.1; break;
    case StepTag::r6: rule.beta = 1.99; break;
  }
  return rule;
}

// Advances beta for iteration q and returns the value to use there. For
// r1, `improved` means the dual value improved on the best seen so far.
inline double beta_update(StepRule& rule, bool improved, long q, double beta_floor = 1e-12) {
  switch (rule.tag) {
    case StepTag::r1:
      if (!improved) rule.beta = std::max(rule.beta / 2.0, beta_floor);
      break;
    case StepTag::r2:
    case StepTag::r3:
      if (q > 0 && rule.period > 0 && q % rule.period == 0)
        rule.beta = std::max(rule.beta / 2.0, beta_floor);
      break;
    case StepTag::r4:
    case StepTag::r5:
    case StepTag::r6:
      break;  // constant
  }
  return rule.beta;
}

// Projection onto the nonnegative orthant keeps the multipliers dual
// feasible (and the shortest-path weights nonnegative).
inline MultiplierVector update_multipliers(const MultiplierVector& w, double lambda,
                                           const std::vector<double>& d) {
  MultiplierVector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::max(0.0, w[i] + lambda * d[i]);
  return out;
}

class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// max flow between s and t on the undirected graph with the given edge
// capacities (BFS augmentation)
inline std::int64_t max_flow(const Instance& inst, const std::vector<std::int64_t>& capacity,
                             int s, int t) {
  const int n = inst.node_count;
  const std::size_t m = inst.edges.size();
  // arcs 2e and 2e+1 are the two orientations of edge e
  std::vector<std::int64_t> residual(2 * m);
  for (std::size_t e = 0; e < m; ++e) residual[2 * e] = residual[2 * e + 1] = capacity[e];
  std::vector<std::vector<std::size_t>> out_arcs(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < m; ++e) {
    out_arcs[static_cast<std::size_t>(inst.edges[e].u)].push_back(2 * e);
    out_arcs[static_cast<std::size_t>(inst.edges[e].v)].push_back(2 * e + 1);
  }
  auto arc_head = [&](std::size_t a) {
    const Edge& ed = inst.edges[a / 2];
    return a % 2 == 0 ? ed.v : ed.u;
  };

  std::int64_t flow = 0;
  for (;;) {
    std::vector<std::size_t> parent_arc(static_cast<std::size_t>(n), SIZE_MAX);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<int> q;
    q.push(s);
    seen[static_cast<std::size_t>(s)] = 1;
    while (!q.empty() && !seen[static_cast<std::size_t>(t)]) {
      const int at = q.front();
      q.pop();
      for (std::size_t a : out_arcs[static_cast<std::size_t>(at)]) {
        const int to = arc_head(a);
        if (seen[static_cast<std::size_t>(to)] || residual[a] <= 0) continue;
        seen[static_cast<std::size_t>(to)] = 1;
        parent_arc[static_cast<std::size_t>(to)] = a;
        q.push(to);
      }
    }
    if (!seen[static_cast<std::size_t>(t)]) return flow;
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (int at = t; at != s;) {
      const std::size_t a = parent_arc[static_cast<std::size_t>(at)];
      push = std::min(push, residual[a]);
      at = a % 2 == 0 ? inst.edges[a / 2].u : inst.edges[a / 2].v;
    }
    for (int at = t; at != s;) {
      const std::size_t a = parent_arc[static_cast<std::size_t>(at)];
      residual[a] -= push;
      residual[a ^ 1] += push;
      at = a % 2 == 0 ? inst.edges[a / 2].u : inst.edges[a / 2].v;
    }
    flow += push;
  }
}

}  // namespace detail

struct UpperBound {
  double value = 0.0;
  bool feasible = true;  // true when derived from a capacity-feasible design
};

// Feasible-design heuristic. Seed routing: every commodity on its
// fewest-hop path; if that overloads some edge beyond its largest
// facility, rebuild by routing commodities in decreasing demand order on
// cheapest-marginal-cost paths (marginal = facility cost increase of
// adding the demand, capacity-respecting). The seed is then improved by
// reroute sweeps (pull one commodity out, reinsert it on its cheapest
// marginal path) interleaved with edge-closing moves (forbid one loaded
// edge, reroute all its users, keep the close when the priced design gets
// cheaper). Pricing always installs the cheapest sufficient facility per
// loaded edge. When no routing is found the all-largest-facilities
// network is priced instead, flagged infeasible; throws InfeasibleError
// when some commodity alone exceeds the largest-facility max flow between
// its endpoints.
inline UpperBound compute_upper_bound(const Instance& inst) {
  if (inst.commodities.empty()) return {0.0, true};
  const std::size_t m = inst.edges.size();
  const std::size_t K = inst.commodities.size();
  constexpr double kForbidden = 1e15;  // edge would exceed its largest facility

  // cheapest facility cost covering the load; negative when impossible
  auto fit_cost = [&](std::size_t e, std::int64_t load) -> double {
    if (load <= 0) return 0.0;
    for (const FacilityOption& f : inst.edges[e].facilities)
      if (f.capacity >= load) return static_cast<double>(f.cost);
    return -1.0;
  };

  std::vector<std::vector<int>> routing(K);
  std::vector<std::int64_t> load(m, 0);
  auto apply = [&](std::size_t k, std::int64_t sign) {
    for (int e : routing[k]) load[static_cast<std::size_t>(e)] += sign * inst.commodities[k].demand;
  };
  auto marginal_weights = [&](std::int64_t demand) {
    std::vector<double> w(m);
    for (std::size_t e = 0; e < m; ++e) {
      const double before = fit_cost(e, load[e]);
      const double after = fit_cost(e, load[e] + demand);
      w[e] = after < 0.0 ? kForbidden : after - before;
    }
    return w;
  };
  auto total_cost = [&]() -> double {
    double c = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      const double f = fit_cost(e, load[e]);
      if (f < 0.0) return -1.0;
      c += f;
    }
    return c;
  };

  bool have = true;
  {
    const ShortestPathTable sp = all_pairs_shortest_paths(inst, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
      routing[k] = sp.path(inst.commodities[k].source, inst.commodities[k].sink);
      apply(k, +1);
    }
    have = total_cost() >= 0.0;
  }

  if (!have) {
    std::fill(load.begin(), load.end(), 0);
    std::vector<std::size_t> order(K);
    for (std::size_t k = 0; k < K; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return inst.commodities[a].demand > inst.commodities[b].demand;
    });
    have = true;
    for (std::size_t k : order) {
      const Commodity& c = inst.commodities[k];
      const ShortestPathTable sp = all_pairs_shortest_paths(inst, marginal_weights(c.demand));
      if (sp.distance(c.source, c.sink) >= kForbidden) {
        have = false;
        break;
      }
      routing[k] = sp.path(c.source, c.sink);
      apply(k, +1);
    }
  }

  if (!have) {
    std::vector<std::int64_t> max_caps(m);
    double all_largest = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      max_caps[e] = inst.edges[e].facilities.back().capacity;
      all_largest += static_cast<double>(inst.edges[e].facilities.back().cost);
    }
    for (const Commodity& c : inst.commodities) {
      if (detail::max_flow(inst, max_caps, c.source, c.sink) < c.demand)
        throw InfeasibleError("commodity " + std::to_string(&c - inst.commodities.data()) +
                              " demand exceeds the largest-facility cut capacity");
    }
    return {all_largest, false};
  }

  auto reroute_sweeps = [&]() {
    for (int sweep = 0; sweep < 25; ++sweep) {
      bool changed = false;
      for (std::size_t k = 0; k < K; ++k) {
        const Commodity& c = inst.commodities[k];
        apply(k, -1);
        const std::vector<double> w = marginal_weights(c.demand);
        double old_marginal = 0.0;
        for (int e : routing[k]) old_marginal += w[static_cast<std::size_t>(e)];
        const ShortestPathTable sp = all_pairs_shortest_paths(inst, w);
        if (sp.distance(c.source, c.sink) < old_marginal - 1e-9) {
          routing[k] = sp.path(c.source, c.sink);
          changed = true;
        }
        apply(k, +1);
      }
      if (!changed) break;
    }
  };

  // Try to empty one edge: reroute every commodity crossing it, keep the
  // move only when the priced design gets strictly cheaper. Candidates are
  // the worst cost-per-unit edges; one FW solve per displaced commodity
  // keeps a close attempt cheap enough to try a couple dozen per round.
  auto close_edges = [&]() {
    bool any = false;
    std::vector<std::size_t> cand;
    for (std::size_t e = 0; e < m; ++e)
      if (load[e] > 0) cand.push_back(e);
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
      return fit_cost(a, load[a]) * static_cast<double>(load[b]) >
             fit_cost(b, load[b]) * static_cast<double>(load[a]);
    });
    if (cand.size() > 24) cand.resize(24);
    for (std::size_t e : cand) {
      if (load[e] <= 0) continue;
      std::vector<std::size_t> users;
      for (std::size_t k = 0; k < K; ++k)
        if (std::find(routing[k].begin(), routing[k].end(), static_cast<int>(e)) !=
            routing[k].end())
          users.push_back(k);
      std::stable_sort(users.begin(), users.end(), [&](std::size_t a, std::size_t b) {
        return inst.commodities[a].demand > inst.commodities[b].demand;
      });
      const double cost_before = total_cost();
      const std::vector<std::int64_t> load_before = load;
      std::vector<std::vector<int>> paths_before;
      paths_before.reserve(users.size());
      for (std::size_t k : users) paths_before.push_back(routing[k]);
      bool ok = true;
      for (std::size_t k : users) {
        const Commodity& c = inst.commodities[k];
        apply(k, -1);
        std::vector<double> w = marginal_weights(c.demand);
        w[e] = kForbidden;
        const ShortestPathTable sp = all_pairs_shortest_paths(inst, w);
        if (sp.distance(c.source, c.sink) >= kForbidden) {
          apply(k, +1);
          ok = false;
          break;
        }
        routing[k] = sp.path(c.source, c.sink);
        apply(k, +1);
      }
      if (ok && total_cost() < cost_before - 1e-9) {
        any = true;
      } else {
        load = load_before;
        for (std::size_t i = 0; i < users.size(); ++i) routing[users[i]] = std::move(paths_before[i]);
      }
    }
    return any;
  };

  reroute_sweeps();
  for (int round = 0; round < 3 && close_edges(); ++round) reroute_sweeps();
  return {total_cost(), true};
}

enum class StopReason { zero_gradient, stall, iteration_cap, gap_closed };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::zero_gradient: return "zero_gradient";
    case StopReason::stall: return "stall";
    case StopReason::iteration_cap: return "iteration_cap";
    case StopReason::gap_closed: return "gap_closed";
  }
  return "?";
}

struct IterationRecord {
  long q = 0;
  double theta = 0.0;
  double best_theta = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double grad_norm = 0.0;
  double dir_norm = 0.0;
};

// Per-iteration view passed to the optional observer, valid during the
// callback only.
struct IterationView {
  const IterationRecord& record;
  const MultiplierVector& multipliers;
  const DualEvaluation& evaluation;
  const std::vector<double>& direction;  // empty on the stopping iteration
};

struct SolverConfig {
  DirectionRule direction;
  StepTag step = StepTag::r1;
  int max_stall = 100;
  double eps_grad = 1e-6;
  double eps_dir = 1e-6;
  double beta_floor = 1e-12;
  long max_iterations = 100'000;
  std::optional<double> upper_bound;  // overrides the heuristic when set
  std::uint64_t ap_y_budget = 1'000'000;
  bool record_trajectory = true;
  std::function<void(const IterationView&)> observer;
};

struct SolverReport {
  double best_theta = 0.0;  // the certified lower bound
  double upper_bound = 0.0;
  bool ub_feasible = true;
  long iterations = 0;  // dual evaluations performed
  StopReason stop_reason = StopReason::stall;
  std::vector<IterationRecord> trajectory;
  double wall_time = 0.0;  // seconds
  bool all_y_exact = true;
};

inline SolverReport run(const Instance& inst, const SolverConfig& config) {
  if (config.max_stall <= 0 || config.max_iterations <= 0 || config.eps_grad <= 0.0 ||
      config.eps_dir <= 0.0 || config.beta_floor <= 0.0)
    throw std::invalid_argument("solver config: tolerances and limits must be positive");
  if (config.direction.alpha <= 0.0 || config.direction.alpha > 1.0)
    throw std::invalid_argument("solver config: alpha must be in (0, 1]");

  const auto t0 = std::chrono::steady_clock::now();
  SolverReport report;
  if (config.upper_bound) {
    report.upper_bound = *config.upper_bound;
    report.ub_feasible = true;  // caller asserts it
  } else {
    const UpperBound ub = compute_upper_bound(inst);
    report.upper_bound = ub.value;
    report.ub_feasible = ub.feasible;
  }

  const TerminalSet terminals = terminal_set(inst);
  MultiplierVector w = initial_multipliers(inst.edges.size());
  StepRule rule = make_step_rule(config.step, inst.node_count, inst.edges.size());
  std::vector<double> g_prev, d_prev;
  double best = -std::numeric_limits<double>::infinity();
  int stall = 0;

  auto finish = [&](StopReason reason) {
    report.stop_reason = reason;
    report.best_theta = best;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  };

  for (long q = 0;; ++q) {
    if (q >= config.max_iterations) return finish(StopReason::iteration_cap);

    const DualEvaluation ev = evaluate_dual(inst, w, terminals, config.ap_y_budget);
    report.all_y_exact = report.all_y_exact && ev.exact_y;
    ++report.iterations;

    const bool improved =
        !std::isfinite(best) || ev.theta > best + 1e-9 * (1.0 + std::abs(best));
    if (ev.theta > best) best = ev.theta;
    const double beta = beta_update(rule, improved, q, config.beta_floor);
    const double grad_norm = detail::norm(ev.subgradient);

    IterationRecord rec{q, ev.theta, best, beta, 0.0, grad_norm, 0.0};
    const auto emit = [&](const std::vector<double>& d) {
      if (config.record_trajectory) report.trajectory.push_back(rec);
      if (config.observer) config.observer(IterationView{rec, w, ev, d});
    };
    static const std::vector<double> kNoDirection;

    if (grad_norm < config.eps_grad) {
      emit(kNoDirection);
      return finish(StopReason::zero_gradient);
    }
    if (report.upper_bound - best < 1e-9 * (1.0 + std::abs(report.upper_bound))) {
      emit(kNoDirection);
      return finish(StopReason::gap_closed);
    }
    stall = improved ? 0 : stall + 1;
    if (stall >= config.max_stall) {
      emit(kNoDirection);
      return finish(StopReason::stall);
    }

    const std::vector<double> d =
        direction(config.direction, q, ev.subgradient, g_prev, d_prev, config.eps_dir);
    const double lambda = step_length(beta, report.upper_bound, ev.theta, d);
    rec.lambda = lambda;
    rec.dir_norm = detail::norm(d);
    emit(d);

    w = update_multipliers(w, lambda, d);
    g_prev = ev.subgradient;
    d_prev = d;
  }
}

}  // namespace dcmndp
