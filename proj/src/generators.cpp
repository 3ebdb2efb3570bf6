#include "linkpred/generators.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "linkpred/errors.hpp"
#include "linkpred/random.hpp"

namespace linkpred {

AttributedGraph erdos_renyi(std::size_t n, double p, std::uint64_t seed, std::string network_id) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (uniform01(rng) < p) edges.push_back({u, v});
    }
  }
  return AttributedGraph::from_edges(n, edges, {}, std::move(network_id));
}

AttributedGraph powerlaw_cluster(std::size_t n, std::size_t m, double triad_p,
                                 std::uint64_t seed, std::string network_id) {
  if (m < 1 || m >= n) throw DomainError("powerlaw_cluster requires 1 <= m < n");
  if (triad_p < 0.0 || triad_p > 1.0) throw DomainError("triad probability outside [0, 1]");
  Rng rng(seed);

  std::vector<std::vector<NodeId>> adj(n);
  auto connected = [&](NodeId a, NodeId b) {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
  };
  auto connect = [&](NodeId a, NodeId b) {
    if (a == b || connected(a, b)) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  };

  // each node appears once per incident edge (plus m times on arrival), so a
  // uniform draw from this list is a degree-proportional draw
  std::vector<NodeId> repeated;
  for (NodeId i = 0; i < m; ++i) repeated.push_back(i);

  for (NodeId source = static_cast<NodeId>(m); source < n; ++source) {
    std::set<NodeId> chosen;
    while (chosen.size() < m) chosen.insert(repeated[uniform_index(rng, repeated.size())]);
    std::vector<NodeId> targets(chosen.begin(), chosen.end());
    shuffle(targets, rng);

    NodeId target = targets.back();
    targets.pop_back();
    connect(source, target);
    repeated.push_back(target);
    std::size_t count = 1;
    while (count < m) {
      if (uniform01(rng) < triad_p) {
        std::vector<NodeId> open;
        for (NodeId w : adj[target]) {
          if (w != source && !connected(source, w)) open.push_back(w);
        }
        if (!open.empty()) {
          const NodeId w = open[uniform_index(rng, open.size())];
          connect(source, w);
          repeated.push_back(w);
          ++count;
          continue;
        }
      }
      target = targets.back();
      targets.pop_back();
      connect(source, target);
      repeated.push_back(target);
      ++count;
    }
    repeated.insert(repeated.end(), m, source);
  }

  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : adj[u]) {
      if (u < v) edges.push_back({u, v});
    }
  }
  return AttributedGraph::from_edges(n, edges, {}, std::move(network_id));
}

std::vector<AttributeRecord> synthetic_attributes(std::size_t n, std::uint64_t seed,
                                                  double missing_rate) {
  Rng rng(seed);
  auto code = [&](int levels) {
    if (uniform01(rng) < missing_rate) return 0;
    return 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(levels)));
  };
  std::vector<AttributeRecord> out(n);
  for (auto& a : out) {
    a.status = code(6);
    a.gender = code(2);
    a.major = code(60);
    a.minor = code(60);
    a.dorm = code(30);
    if (uniform01(rng) >= missing_rate) a.year = 2002 + static_cast<int>(uniform_index(rng, 4));
    a.high_school = code(2000);
  }
  return out;
}

AttributedGraph with_attributes(const AttributedGraph& g,
                                std::vector<AttributeRecord> attributes) {
  return AttributedGraph::from_edges(g.node_count(), g.edges(), std::move(attributes),
                                     g.network_id(), g.original_ids());
}

}  // namespace linkpred
