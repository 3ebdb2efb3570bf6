#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "linkpred/graph.hpp"

namespace linkpred {

/// The four neighbour-based similarity scores of one node pair.
struct PairScore {
  NodeId u = 0;
  NodeId v = 0;
  double jc = 0.0;   // Jaccard coefficient
  double aa = 0.0;   // Adamic-Adar
  double pa = 0.0;   // preferential attachment
  double rai = 0.0;  // resource allocation index

  bool operator==(const PairScore&) const = default;
};

// All scalar metrics require u != v and both nodes present (DomainError otherwise).

/// |N(u) & N(v)| / |N(u) | N(v)|, or 0 when both neighbourhoods are empty.
double jaccard(const AttributedGraph& g, NodeId u, NodeId v);
/// Sum over common neighbours z of 1 / ln deg(z).
double adamic_adar(const AttributedGraph& g, NodeId u, NodeId v);
/// deg(u) * deg(v).
double preferential_attachment(const AttributedGraph& g, NodeId u, NodeId v);
/// Sum over common neighbours z of 1 / deg(z).
double resource_allocation(const AttributedGraph& g, NodeId u, NodeId v);

/// All four metrics in one neighbourhood merge.
PairScore score_pair(const AttributedGraph& g, NodeId u, NodeId v);

/// Batch scoring, parallel over pairs; element i always corresponds to pairs[i].
/// An invalid pair aborts the batch with a DomainError naming its index.
std::vector<PairScore> score_pairs(const AttributedGraph& g, std::span<const Edge> pairs,
                                   std::size_t threads = 0);

/// CSV `u,v,jc,aa,pa,rai` using original node ids.
void write_pair_scores_csv(const AttributedGraph& g, std::span<const PairScore> scores,
                           const std::filesystem::path& path);

}  // namespace linkpred
