#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace linkpred {

using NodeId = std::uint32_t;

/// Unordered node pair, stored with u < v once canonicalised.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge canonical() const { return u < v ? *this : Edge{v, u}; }
  auto operator<=>(const Edge&) const = default;
};

/// Per-node demographic codes. Code 0 means missing; year is absent when unknown.
struct AttributeRecord {
  int status = 0;
  int gender = 0;
  int major = 0;
  int minor = 0;
  int dorm = 0;
  std::optional<int> year;
  int high_school = 0;

  bool operator==(const AttributeRecord&) const = default;
};

/// Immutable undirected simple graph over dense ids [0, node_count) with
/// sorted CSR adjacency and one attribute record per node.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  /// Builds a graph from edges given in any orientation. Duplicates (including
  /// reversed duplicates) collapse; self-loops and out-of-range ids throw
  /// ValidationError. Missing attributes/original ids default to blank / identity.
  static AttributedGraph from_edges(std::size_t node_count, std::span<const Edge> edges,
                                    std::vector<AttributeRecord> attributes = {},
                                    std::string network_id = {},
                                    std::vector<std::int64_t> original_ids = {});

  std::size_t node_count() const noexcept { return attributes_.size(); }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }
  bool empty() const noexcept { return attributes_.empty(); }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
  bool has_node(NodeId u) const noexcept { return u < node_count(); }
  bool has_edge(NodeId u, NodeId v) const;

  /// Throws DomainError when u is not a node of this graph.
  void require_node(NodeId u) const;

  const AttributeRecord& attributes(NodeId u) const { return attributes_[u]; }
  const std::string& network_id() const noexcept { return network_id_; }
  std::int64_t original_id(NodeId u) const { return original_ids_[u]; }
  const std::vector<std::int64_t>& original_ids() const noexcept { return original_ids_; }
  /// Dense id for a source-file id, if present.
  std::optional<NodeId> dense_id(std::int64_t original) const;

  /// All edges with u < v, in ascending order.
  std::vector<Edge> edges() const;

  /// Copy of this graph with the given edges removed (node set unchanged).
  AttributedGraph without_edges(std::span<const Edge> removed) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> targets_;
  std::vector<AttributeRecord> attributes_;
  std::vector<std::int64_t> original_ids_;
  std::string network_id_;
};

struct GraphStats {
  std::size_t n = 0;
  std::size_t m = 0;
  double average_degree = 0.0;
  double average_clustering = 0.0;

  bool operator==(const GraphStats&) const = default;
};

/// Loads an edge list ("u v" per line, whitespace or comma separated, `#`
/// comments) and an attribute CSV. Node ids are re-indexed densely in ascending
/// order of their source id.
AttributedGraph load_graph(const std::filesystem::path& edge_file,
                           const std::filesystem::path& attribute_file,
                           std::string network_id);

std::vector<AttributeRecord> read_attribute_file(const std::filesystem::path& path,
                                                 std::vector<std::int64_t>& ids);

/// Writes edges using original ids, one "u v" per line.
void write_edge_file(const AttributedGraph& g, const std::filesystem::path& path);
void write_attribute_file(const AttributedGraph& g, const std::filesystem::path& path);

double clustering_coefficient(const AttributedGraph& g, NodeId node);
GraphStats graph_stats(const AttributedGraph& g);

/// (degree, count) pairs, degrees ascending, zero counts omitted.
std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const AttributedGraph& g);
void write_degree_histogram_csv(const AttributedGraph& g, const std::filesystem::path& path);

/// Size of the intersection of two sorted id lists.
std::size_t sorted_intersection_size(std::span<const NodeId> a, std::span<const NodeId> b);

}  // namespace linkpred
