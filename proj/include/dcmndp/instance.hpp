// Instance model for the discrete cost multicommodity network design
// problem: an undirected graph whose edges carry a step-increasing menu of
// capacity/cost facility options, plus point-to-point commodity demands.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dcmndp {

struct FacilityOption {
  std::int64_t capacity = 0;
  std::int64_t cost = 0;

  bool operator==(const FacilityOption&) const = default;
};

struct Edge {
  int u = -1;
  int v = -1;
  std::vector<FacilityOption> facilities;  // strictly increasing in capacity and cost

  bool touches(int node) const { return u == node || v == node; }
  int other(int node) const { return node == u ? v : u; }

  // endpoints are an unordered pair
  bool operator==(const Edge& o) const {
    return std::minmax(u, v) == std::minmax(o.u, o.v) && facilities == o.facilities;
  }
};

struct Commodity {
  int source = -1;
  int sink = -1;
  std::int64_t demand = 0;

  bool operator==(const Commodity&) const = default;
};

struct Instance {
  int node_count = 0;
  std::vector<Edge> edges;            // edge id == index
  std::vector<Commodity> commodities; // commodity id == index
  std::string name;                   // label only, not serialized

  bool operator==(const Instance& o) const {
    return node_count == o.node_count && edges == o.edges && commodities == o.commodities;
  }
};

// Nodes appearing as source or sink of at least one commodity.
struct TerminalSet {
  std::vector<int> nodes;  // sorted, unique

  bool contains(int node) const {
    return std::binary_search(nodes.begin(), nodes.end(), node);
  }
  bool empty() const { return nodes.empty(); }
  std::size_t size() const { return nodes.size(); }
};

class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid instance";
    for (const auto& s : v) {
      out += "\n  " + s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

// Checks every structural invariant and returns one message per violation;
// an empty result means the instance is valid.
inline std::vector<std::string> validate(const Instance& inst) {
  std::vector<std::string> out;
  const int n = inst.node_count;
  if (n < 1) out.push_back("node count must be positive");

  std::map<std::pair<int, int>, std::size_t> seen;
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const Edge& ed = inst.edges[e];
    const bool in_range = ed.u >= 0 && ed.u < n && ed.v >= 0 && ed.v < n;
    if (!in_range) out.push_back("edge " + std::to_string(e) + ": endpoint out of range");
    if (ed.u == ed.v) out.push_back("edge " + std::to_string(e) + ": endpoints not distinct");
    if (in_range && ed.u != ed.v) {
      auto key = std::minmax(ed.u, ed.v);
      auto [it, fresh] = seen.emplace(key, e);
      if (!fresh) {
        out.push_back("duplicate edge between nodes " + std::to_string(key.first) + " and " +
                      std::to_string(key.second) + " (edges " + std::to_string(it->second) +
                      " and " + std::to_string(e) + ")");
      }
    }
    if (ed.facilities.empty()) {
      out.push_back("edge " + std::to_string(e) + ": empty facility menu");
      continue;
    }
    for (std::size_t l = 0; l < ed.facilities.size(); ++l) {
      if (ed.facilities[l].capacity <= 0)
        out.push_back("edge " + std::to_string(e) + ": facility " + std::to_string(l) +
                      ": capacity must be positive");
      if (ed.facilities[l].cost <= 0)
        out.push_back("edge " + std::to_string(e) + ": facility " + std::to_string(l) +
                      ": cost must be positive");
    }
    for (std::size_t l = 1; l < ed.facilities.size(); ++l) {
      if (ed.facilities[l].capacity <= ed.facilities[l - 1].capacity ||
          ed.facilities[l].cost <= ed.facilities[l - 1].cost) {
        out.push_back("facilities not step-increasing at edge " + std::to_string(e));
        break;
      }
    }
  }

  for (std::size_t k = 0; k < inst.commodities.size(); ++k) {
    const Commodity& c = inst.commodities[k];
    if (c.source < 0 || c.source >= n || c.sink < 0 || c.sink >= n)
      out.push_back("commodity " + std::to_string(k) + ": endpoint out of range");
    if (c.source == c.sink)
      out.push_back("commodity " + std::to_string(k) + ": source equals sink");
    if (c.demand <= 0)
      out.push_back("commodity " + std::to_string(k) + ": demand must be positive");
  }

  if (n >= 1) {
    std::vector<std::vector<int>> adj(n);
    for (const Edge& ed : inst.edges) {
      if (ed.u >= 0 && ed.u < n && ed.v >= 0 && ed.v < n && ed.u != ed.v) {
        adj[ed.u].push_back(ed.v);
        adj[ed.v].push_back(ed.u);
      }
    }
    std::vector<char> reached(n, 0);
    std::queue<int> q;
    q.push(0);
    reached[0] = 1;
    int count = 1;
    while (!q.empty()) {
      int at = q.front();
      q.pop();
      for (int to : adj[at]) {
        if (!reached[to]) {
          reached[to] = 1;
          ++count;
          q.push(to);
        }
      }
    }
    if (count != n) out.push_back("graph disconnected");
  }
  return out;
}

inline TerminalSet terminal_set(const Instance& inst) {
  TerminalSet t;
  t.nodes.reserve(2 * inst.commodities.size());
  for (const Commodity& c : inst.commodities) {
    t.nodes.push_back(c.source);
    t.nodes.push_back(c.sink);
  }
  std::sort(t.nodes.begin(), t.nodes.end());
  t.nodes.erase(std::unique(t.nodes.begin(), t.nodes.end()), t.nodes.end());
  return t;
}

namespace detail {

inline bool parse_int(std::string_view tok, std::int64_t& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

}  // namespace detail

// Parses the DCMNDP-v1 text format:
//   dcmndp 1
//   n <nodes> m <edges> k <commodities>
//   e <id> <u> <v> <L>   followed by L lines   f <capacity> <cost>
//   c <id> <source> <sink> <demand>
// '#' starts a comment; directives may appear in any id order. Throws
// ParseError on malformed text and ValidationError on invariant violations.
inline Instance parse_instance(std::istream& in, std::string name = "") {
  Instance inst;
  inst.name = std::move(name);

  int lineno = 0;
  int stage = 0;  // 0 = header, 1 = sizes, 2 = body
  std::int64_t m = 0, k = 0;
  std::vector<char> edge_set, comm_set;
  int pending_edge = -1;
  std::int64_t pending_facilities = 0;

  auto want_int = [&](const std::string& tok, const char* what) {
    std::int64_t value = 0;
    if (!detail::parse_int(tok, value))
      throw ParseError(lineno, std::string("expected integer ") + what + ", got '" + tok + "'");
    return value;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;

    if (stage == 0) {
      if (toks.size() != 2 || toks[0] != "dcmndp")
        throw ParseError(lineno, "expected 'dcmndp 1' header");
      if (toks[1] != "1")
        throw ParseError(lineno, "unsupported format version '" + toks[1] + "'");
      stage = 1;
      continue;
    }
    if (stage == 1) {
      if (toks.size() != 6 || toks[0] != "n" || toks[2] != "m" || toks[4] != "k")
        throw ParseError(lineno, "expected 'n <nodes> m <edges> k <commodities>'");
      std::int64_t n = want_int(toks[1], "node count");
      m = want_int(toks[3], "edge count");
      k = want_int(toks[5], "commodity count");
      constexpr std::int64_t kSizeCap = 10'000'000;
      if (n < 0 || m < 0 || k < 0 || n > kSizeCap || m > kSizeCap || k > kSizeCap)
        throw ParseError(lineno, "size out of range");
      inst.node_count = static_cast<int>(n);
      inst.edges.resize(static_cast<std::size_t>(m));
      inst.commodities.resize(static_cast<std::size_t>(k));
      edge_set.assign(static_cast<std::size_t>(m), 0);
      comm_set.assign(static_cast<std::size_t>(k), 0);
      stage = 2;
      continue;
    }

    if (toks[0] == "e") {
      if (pending_facilities > 0)
        throw ParseError(lineno, "expected 'f <capacity> <cost>' for edge " +
                                     std::to_string(pending_edge));
      if (toks.size() != 5)
        throw ParseError(lineno, "expected 'e <id> <u> <v> <L>'");
      std::int64_t id = want_int(toks[1], "edge id");
      std::int64_t u = want_int(toks[2], "endpoint");
      std::int64_t v = want_int(toks[3], "endpoint");
      std::int64_t nfac = want_int(toks[4], "facility count");
      if (id < 0 || id >= m)
        throw ParseError(lineno, "edge id " + std::to_string(id) + " out of range [0, " +
                                     std::to_string(m) + ")");
      if (edge_set[static_cast<std::size_t>(id)])
        throw ParseError(lineno, "duplicate edge id " + std::to_string(id));
      if (nfac < 1 || nfac > 1'000'000)
        throw ParseError(lineno, "facility count out of range");
      edge_set[static_cast<std::size_t>(id)] = 1;
      Edge& ed = inst.edges[static_cast<std::size_t>(id)];
      ed.u = static_cast<int>(std::min(u, v));
      ed.v = static_cast<int>(std::max(u, v));
      ed.facilities.reserve(static_cast<std::size_t>(nfac));
      pending_edge = static_cast<int>(id);
      pending_facilities = nfac;
    } else if (toks[0] == "f") {
      if (pending_facilities <= 0)
        throw ParseError(lineno, "facility line outside an edge block");
      if (toks.size() != 3)
        throw ParseError(lineno, "expected 'f <capacity> <cost>'");
      FacilityOption fac;
      fac.capacity = want_int(toks[1], "capacity");
      fac.cost = want_int(toks[2], "cost");
      inst.edges[static_cast<std::size_t>(pending_edge)].facilities.push_back(fac);
      --pending_facilities;
    } else if (toks[0] == "c") {
      if (pending_facilities > 0)
        throw ParseError(lineno, "expected 'f <capacity> <cost>' for edge " +
                                     std::to_string(pending_edge));
      if (toks.size() != 5)
        throw ParseError(lineno, "expected 'c <id> <source> <sink> <demand>'");
      std::int64_t id = want_int(toks[1], "commodity id");
      if (id < 0 || id >= k)
        throw ParseError(lineno, "commodity id " + std::to_string(id) + " out of range [0, " +
                                     std::to_string(k) + ")");
      if (comm_set[static_cast<std::size_t>(id)])
        throw ParseError(lineno, "duplicate commodity id " + std::to_string(id));
      comm_set[static_cast<std::size_t>(id)] = 1;
      Commodity& c = inst.commodities[static_cast<std::size_t>(id)];
      c.source = static_cast<int>(want_int(toks[2], "source"));
      c.sink = static_cast<int>(want_int(toks[3], "sink"));
      c.demand = want_int(toks[4], "demand");
    } else {
      throw ParseError(lineno, "unknown directive '" + toks[0] + "'");
    }
  }

  if (stage < 2) throw ParseError(lineno, "unexpected end of file");
  if (pending_facilities > 0)
    throw ParseError(lineno, "unexpected end of file: edge " + std::to_string(pending_edge) +
                                 " facilities incomplete");
  for (std::size_t i = 0; i < edge_set.size(); ++i)
    if (!edge_set[i]) throw ParseError(lineno, "missing edge id " + std::to_string(i));
  for (std::size_t i = 0; i < comm_set.size(); ++i)
    if (!comm_set[i]) throw ParseError(lineno, "missing commodity id " + std::to_string(i));

  if (auto violations = validate(inst); !violations.empty())
    throw ValidationError(std::move(violations));
  return inst;
}

inline Instance parse_instance(const std::string& text, std::string name = "") {
  std::istringstream in(text);
  return parse_instance(in, std::move(name));
}

// Canonical DCMNDP-v1 text: edges ordered by id with endpoints printed
// low-high, facilities in menu order. Structurally equal instances
// serialize to identical bytes.
inline std::string serialize_instance(const Instance& inst) {
  std::ostringstream out;
  out << "dcmndp 1\n";
  out << "n " << inst.node_count << " m " << inst.edges.size() << " k "
      << inst.commodities.size() << '\n';
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const Edge& ed = inst.edges[e];
    out << "e " << e << ' ' << std::min(ed.u, ed.v) << ' ' << std::max(ed.u, ed.v) << ' '
        << ed.facilities.size() << '\n';
    for (const FacilityOption& fac : ed.facilities)
      out << "f " << fac.capacity << ' ' << fac.cost << '\n';
  }
  for (std::size_t c = 0; c < inst.commodities.size(); ++c) {
    const Commodity& com = inst.commodities[c];
    out << "c " << c << ' ' << com.source << ' ' << com.sink << ' ' << com.demand << '\n';
  }
  return out.str();
}

struct GeneratorParams {
  int node_count = 10;
  int edge_count = 15;
  int facility_count = 3;
  std::uint64_t seed = 0;
  std::int64_t demand_min = 1, demand_max = 20;
  std::int64_t base_capacity_min = 10, base_capacity_max = 50;
  std::int64_t base_cost_min = 10, base_cost_max = 100;
  std::string name;  // defaults to a label derived from the parameters
};

namespace detail {

// Unbiased uniform draw in [0, bound); mt19937_64 keeps results
// reproducible across platforms, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(
                  uniform_below(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return lo + (hi - lo) * u;
}

template <typename T>
inline void shuffle(std::mt19937_64& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

}  // namespace detail

// Random connected instance: a random spanning tree plus extra distinct
// edges, one commodity per unordered node pair (K = n(n-1)/2), and a
// step-increasing facility menu per edge. Identical params give a
// byte-identical serialized instance.
inline Instance generate_random(const GeneratorParams& p) {
  const std::int64_t n = p.node_count;
  const std::int64_t m = p.edge_count;
  if (n < 1) throw std::invalid_argument("generator: node count must be positive");
  if (m < n - 1) throw std::invalid_argument("generator: too few edges for a connected graph");
  if (m > n * (n - 1) / 2) throw std::invalid_argument("generator: too many edges");
  if (p.facility_count < 1 || p.facility_count > 32)
    throw std::invalid_argument("generator: facility count out of range [1, 32]");
  if (p.demand_min < 1 || p.demand_min > p.demand_max ||
      p.base_capacity_min < 1 || p.base_capacity_min > p.base_capacity_max ||
      p.base_cost_min < 1 || p.base_cost_min > p.base_cost_max)
    throw std::invalid_argument("generator: bad value range");

  std::mt19937_64 rng(p.seed);
  Instance inst;
  inst.node_count = static_cast<int>(n);
  inst.name = p.name;
  if (inst.name.empty()) {
    inst.name = "rand-n" + std::to_string(n) + "-m" + std::to_string(m) + "-L" +
                std::to_string(p.facility_count) + "-s" + std::to_string(p.seed);
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  detail::shuffle(rng, perm);

  std::map<std::pair<int, int>, bool> used;
  auto add_edge = [&](int a, int b) {
    Edge ed;
    ed.u = std::min(a, b);
    ed.v = std::max(a, b);
    used[{ed.u, ed.v}] = true;
    inst.edges.push_back(std::move(ed));
  };
  for (std::int64_t i = 1; i < n; ++i) {
    std::int64_t j = detail::uniform_int(rng, 0, i - 1);
    add_edge(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(i)]);
  }

  std::vector<std::pair<int, int>> candidates;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!used.count({a, b})) candidates.emplace_back(a, b);
  detail::shuffle(rng, candidates);
  for (std::int64_t i = 0; i < m - (n - 1); ++i)
    add_edge(candidates[static_cast<std::size_t>(i)].first,
             candidates[static_cast<std::size_t>(i)].second);

  for (Edge& ed : inst.edges) {
    std::int64_t cap = detail::uniform_int(rng, p.base_capacity_min, p.base_capacity_max);
    std::int64_t cost = detail::uniform_int(rng, p.base_cost_min, p.base_cost_max);
    ed.facilities.push_back({cap, cost});
    for (int l = 1; l < p.facility_count; ++l) {
      const std::int64_t next_cap = static_cast<std::int64_t>(
          std::ceil(static_cast<double>(cap) * detail::uniform_real(rng, 1.5, 2.5)));
      const std::int64_t next_cost = cost + static_cast<std::int64_t>(std::ceil(
          static_cast<double>(next_cap - cap) * detail::uniform_real(rng, 0.3, 0.9)));
      ed.facilities.push_back({next_cap, next_cost});
      cap = next_cap;
      cost = next_cost;
    }
  }

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      Commodity c;
      c.source = a;
      c.sink = b;
      c.demand = detail::uniform_int(rng, p.demand_min, p.demand_max);
      inst.commodities.push_back(c);
    }
  }
  return inst;
}

}  // namespace dcmndp
