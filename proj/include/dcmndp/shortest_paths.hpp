// All-pairs shortest paths under nonnegative per-edge weights, with path
// reconstruction. Ties are broken deterministically: fewer edges first,
// then the smallest intermediate node, via Floyd-Warshall over
// lexicographic (cost, hop count, via) triples.
#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "dcmndp/instance.hpp"

namespace dcmndp {

struct ShortestPathTable {
  int node_count = 0;
  std::vector<double> dist;      // n*n, row-major
  std::vector<int> hops;         // edge count of the chosen path
  std::vector<int> mid;          // intermediate node splitting the path, -1 if direct
  std::vector<int> direct_edge;  // edge id joining the pair, -1 if none

  double distance(int a, int b) const { return dist[idx(a, b)]; }

  // Edge ids of the chosen shortest path from a to b.
  std::vector<int> path(int a, int b) const {
    std::vector<int> out;
    append_path(a, b, out);
    return out;
  }

  std::size_t idx(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(node_count) +
           static_cast<std::size_t>(b);
  }

private:
  void append_path(int a, int b, std::vector<int>& out) const {
    if (a == b) return;
    const int k = mid[idx(a, b)];
    if (k < 0) {
      out.push_back(direct_edge[idx(a, b)]);
      return;
    }
    append_path(a, k, out);
    append_path(k, b, out);
  }
};

inline ShortestPathTable all_pairs_shortest_paths(const Instance& inst,
                                                  const std::vector<double>& edge_weights) {
  const int n = inst.node_count;
  if (edge_weights.size() != inst.edges.size())
    throw std::invalid_argument("edge weight vector length mismatch");
  for (double w : edge_weights)
    if (w < 0.0) throw std::invalid_argument("edge weights must be nonnegative");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  ShortestPathTable t;
  t.node_count = n;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  t.dist.assign(nn, kInf);
  t.hops.assign(nn, 0);
  t.mid.assign(nn, -1);
  t.direct_edge.assign(nn, -1);

  for (int v = 0; v < n; ++v) t.dist[t.idx(v, v)] = 0.0;
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const Edge& ed = inst.edges[e];
    for (auto [a, b] : {std::pair{ed.u, ed.v}, std::pair{ed.v, ed.u}}) {
      const std::size_t i = t.idx(a, b);
      t.dist[i] = edge_weights[e];
      t.hops[i] = 1;
      t.direct_edge[i] = static_cast<int>(e);
    }
  }

  // Lexicographic min-plus over (cost, hops): strict improvement only, so
  // for equal (cost, hops) the smallest intermediate k sticks.
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const std::size_t ik = t.idx(i, k);
      if (t.dist[ik] == kInf) continue;
      for (int j = 0; j < n; ++j) {
        if (j == k || j == i) continue;
        const std::size_t kj = t.idx(k, j);
        if (t.dist[kj] == kInf) continue;
        const std::size_t ij = t.idx(i, j);
        const double cand = t.dist[ik] + t.dist[kj];
        const int cand_hops = t.hops[ik] + t.hops[kj];
        if (cand < t.dist[ij] || (cand == t.dist[ij] && cand_hops < t.hops[ij])) {
          t.dist[ij] = cand;
          t.hops[ij] = cand_hops;
          t.mid[ij] = k;
        }
      }
    }
  }
  return t;
}

}  // namespace dcmndp
