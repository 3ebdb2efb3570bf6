#include "linkpred/similarity.hpp"

#include <cassert>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "linkpred/errors.hpp"
#include "linkpred/parallel.hpp"

namespace linkpred {

namespace {

void check_pair(const AttributedGraph& g, NodeId u, NodeId v) {
  g.require_node(u);
  g.require_node(v);
  if (u == v) throw DomainError(fmt::format("similarity of node {} with itself", u));
}

/// Calls visit(z) for each common neighbour z in ascending id order.
template <class Visit>
void for_each_common(const AttributedGraph& g, NodeId u, NodeId v, Visit&& visit) {
  const auto a = g.neighbors(u);
  const auto b = g.neighbors(v);
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      visit(*i);
      ++i;
      ++j;
    }
  }
}

double aa_term(const AttributedGraph& g, NodeId z) {
  // z is adjacent to two distinct nodes in a simple graph
  assert(g.degree(z) >= 2);
  return 1.0 / std::log(static_cast<double>(g.degree(z)));
}

double rai_term(const AttributedGraph& g, NodeId z) {
  return 1.0 / static_cast<double>(g.degree(z));
}

double jaccard_from(std::size_t common, std::size_t du, std::size_t dv) {
  const std::size_t uni = du + dv - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace

double jaccard(const AttributedGraph& g, NodeId u, NodeId v) {
  check_pair(g, u, v);
  std::size_t common = 0;
  for_each_common(g, u, v, [&](NodeId) { ++common; });
  return jaccard_from(common, g.degree(u), g.degree(v));
}

double adamic_adar(const AttributedGraph& g, NodeId u, NodeId v) {
  check_pair(g, u, v);
  double sum = 0.0;
  for_each_common(g, u, v, [&](NodeId z) { sum += aa_term(g, z); });
  return sum;
}

double preferential_attachment(const AttributedGraph& g, NodeId u, NodeId v) {
  check_pair(g, u, v);
  return static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(v));
}

double resource_allocation(const AttributedGraph& g, NodeId u, NodeId v) {
  check_pair(g, u, v);
  double sum = 0.0;
  for_each_common(g, u, v, [&](NodeId z) { sum += rai_term(g, z); });
  return sum;
}

PairScore score_pair(const AttributedGraph& g, NodeId u, NodeId v) {
  check_pair(g, u, v);
  PairScore s{u, v};
  std::size_t common = 0;
  for_each_common(g, u, v, [&](NodeId z) {
    ++common;
    s.aa += aa_term(g, z);
    s.rai += rai_term(g, z);
  });
  s.jc = jaccard_from(common, g.degree(u), g.degree(v));
  s.pa = static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(v));
  return s;
}

std::vector<PairScore> score_pairs(const AttributedGraph& g, std::span<const Edge> pairs,
                                   std::size_t threads) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [u, v] = pairs[i];
    if (!g.has_node(u) || !g.has_node(v) || u == v) {
      throw DomainError(fmt::format("invalid pair at index {}: ({}, {})", i, u, v));
    }
  }
  std::vector<PairScore> out(pairs.size());
  parallel_for(
      pairs.size(), [&](std::size_t i) { out[i] = score_pair(g, pairs[i].u, pairs[i].v); },
      threads);
  return out;
}

void write_pair_scores_csv(const AttributedGraph& g, std::span<const PairScore> scores,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "u,v,jc,aa,pa,rai\n";
  for (const auto& s : scores) {
    out << fmt::format("{},{},{},{},{},{}\n", g.original_id(s.u), g.original_id(s.v), s.jc, s.aa,
                       s.pa, s.rai);
  }
}

}  // namespace linkpred
