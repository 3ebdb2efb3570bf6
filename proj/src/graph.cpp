#include "linkpred/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "linkpred/errors.hpp"
#include "text_io.hpp"

namespace linkpred {

AttributedGraph AttributedGraph::from_edges(std::size_t node_count, std::span<const Edge> edges,
                                            std::vector<AttributeRecord> attributes,
                                            std::string network_id,
                                            std::vector<std::int64_t> original_ids) {
  if (attributes.empty()) attributes.resize(node_count);
  if (attributes.size() != node_count) {
    throw ValidationError(fmt::format("{} attribute records for {} nodes", attributes.size(),
                                      node_count));
  }
  if (original_ids.empty()) {
    original_ids.resize(node_count);
    for (std::size_t i = 0; i < node_count; ++i) original_ids[i] = static_cast<std::int64_t>(i);
  }
  if (original_ids.size() != node_count) {
    throw ValidationError("original id map does not match node count");
  }

  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw ValidationError(fmt::format("edge ({}, {}) outside node range [0, {})", e.u, e.v,
                                        node_count));
    }
    if (e.u == e.v) throw ValidationError(fmt::format("self-loop on node {}", e.u));
    canon.push_back(e.canonical());
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  AttributedGraph g;
  g.offsets_.assign(node_count + 1, 0);
  for (const Edge& e : canon) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < node_count; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.targets_.resize(canon.size() * 2);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : canon) {
    g.targets_[cursor[e.u]++] = e.v;
    g.targets_[cursor[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < node_count; ++i) {
    std::sort(g.targets_.begin() + g.offsets_[i], g.targets_.begin() + g.offsets_[i + 1]);
  }
  g.attributes_ = std::move(attributes);
  g.original_ids_ = std::move(original_ids);
  g.network_id_ = std::move(network_id);
  return g;
}

bool AttributedGraph::has_edge(NodeId u, NodeId v) const {
  if (!has_node(u) || !has_node(v)) return false;
  // search the shorter list
  if (degree(u) > degree(v)) std::swap(u, v);
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

void AttributedGraph::require_node(NodeId u) const {
  if (!has_node(u)) {
    throw DomainError(fmt::format("node {} not in graph '{}' ({} nodes)", u, network_id_,
                                  node_count()));
  }
}

std::optional<NodeId> AttributedGraph::dense_id(std::int64_t original) const {
  // original ids are stored ascending when loaded from files, but not for
  // graphs built in memory, so fall back to a scan.
  if (std::is_sorted(original_ids_.begin(), original_ids_.end())) {
    auto it = std::lower_bound(original_ids_.begin(), original_ids_.end(), original);
    if (it != original_ids_.end() && *it == original) {
      return static_cast<NodeId>(it - original_ids_.begin());
    }
    return std::nullopt;
  }
  auto it = std::find(original_ids_.begin(), original_ids_.end(), original);
  if (it == original_ids_.end()) return std::nullopt;
  return static_cast<NodeId>(it - original_ids_.begin());
}

std::vector<Edge> AttributedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

AttributedGraph AttributedGraph::without_edges(std::span<const Edge> removed) const {
  std::vector<Edge> drop;
  drop.reserve(removed.size());
  for (const Edge& e : removed) drop.push_back(e.canonical());
  std::sort(drop.begin(), drop.end());
  std::vector<Edge> keep;
  keep.reserve(edge_count());
  for (const Edge& e : edges()) {
    if (!std::binary_search(drop.begin(), drop.end(), e)) keep.push_back(e);
  }
  return from_edges(node_count(), keep, attributes_, network_id_, original_ids_);
}

namespace {

constexpr std::string_view kAttributeHeader =
    "node_id,status,gender,major,minor,dorm,year,high_school";

int parse_code(std::string_view field, const std::string& file, std::size_t line) {
  field = detail::trim(field);
  if (field.empty()) return 0;
  int value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(file, line, fmt::format("expected integer code, got '{}'", field));
  }
  if (value < 0) throw ParseError(file, line, fmt::format("negative code '{}'", field));
  return value;
}

}  // namespace

std::vector<AttributeRecord> read_attribute_file(const std::filesystem::path& path,
                                                 std::vector<std::int64_t>& ids) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open attribute file '{}'", path.string()));
  const std::string file = path.string();

  std::vector<std::pair<std::int64_t, AttributeRecord>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != kAttributeHeader) {
        throw ParseError(file, line_no, fmt::format("expected header '{}'", kAttributeHeader));
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(text, ',');
    if (fields.size() != 8) {
      throw ParseError(file, line_no, fmt::format("expected 8 fields, got {}", fields.size()));
    }
    std::int64_t id = 0;
    if (!detail::parse_int(fields[0], id)) {
      throw ParseError(file, line_no, fmt::format("bad node id '{}'", fields[0]));
    }
    AttributeRecord rec;
    rec.status = parse_code(fields[1], file, line_no);
    rec.gender = parse_code(fields[2], file, line_no);
    rec.major = parse_code(fields[3], file, line_no);
    rec.minor = parse_code(fields[4], file, line_no);
    rec.dorm = parse_code(fields[5], file, line_no);
    const int year = parse_code(fields[6], file, line_no);
    if (year != 0) {
      if (year < 1000 || year > 9999) {
        throw ValidationError(
            fmt::format("{}:{}: year {} is not a 4-digit year", file, line_no, year));
      }
      rec.year = year;
    }
    rec.high_school = parse_code(fields[7], file, line_no);
    rows.emplace_back(id, rec);
  }
  if (!header_seen) throw ParseError(file, line_no, "missing header");

  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw ValidationError(fmt::format("{}: duplicate node id {}", file, rows[i].first));
    }
  }
  ids.clear();
  std::vector<AttributeRecord> out;
  ids.reserve(rows.size());
  out.reserve(rows.size());
  for (auto& [id, rec] : rows) {
    ids.push_back(id);
    out.push_back(rec);
  }
  return out;
}

AttributedGraph load_graph(const std::filesystem::path& edge_file,
                           const std::filesystem::path& attribute_file, std::string network_id) {
  std::vector<std::int64_t> ids;
  auto attributes = read_attribute_file(attribute_file, ids);

  std::unordered_map<std::int64_t, NodeId> dense;
  dense.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) dense.emplace(ids[i], static_cast<NodeId>(i));

  std::ifstream in(edge_file);
  if (!in) throw DataError(fmt::format("cannot open edge file '{}'", edge_file.string()));
  const std::string file = edge_file.string();

  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    const auto tokens = detail::tokenize(text);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw ParseError(file, line_no, fmt::format("expected 2 node ids, got {}", tokens.size()));
    }
    std::int64_t a = 0, b = 0;
    if (!detail::parse_int(tokens[0], a) || !detail::parse_int(tokens[1], b)) {
      throw ParseError(file, line_no, "node ids must be integers");
    }
    if (a == b) {
      throw ValidationError(fmt::format("{}:{}: self-loop on node {}", file, line_no, a));
    }
    auto ia = dense.find(a);
    auto ib = dense.find(b);
    if (ia == dense.end() || ib == dense.end()) {
      throw ReferentialError(fmt::format("{}:{}: node {} missing from attribute file '{}'", file,
                                         line_no, ia == dense.end() ? a : b,
                                         attribute_file.string()));
    }
    edges.push_back({ia->second, ib->second});
  }
  const std::size_t n = ids.size();
  return AttributedGraph::from_edges(n, edges, std::move(attributes),
                                     std::move(network_id), std::move(ids));
}

void write_edge_file(const AttributedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (const Edge& e : g.edges()) {
    out << g.original_id(e.u) << ' ' << g.original_id(e.v) << '\n';
  }
}

void write_attribute_file(const AttributedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << kAttributeHeader << '\n';
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto& a = g.attributes(u);
    out << fmt::format("{},{},{},{},{},{},{},{}\n", g.original_id(u), a.status, a.gender, a.major,
                       a.minor, a.dorm, a.year.value_or(0), a.high_school);
  }
}

std::size_t sorted_intersection_size(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double clustering_coefficient(const AttributedGraph& g, NodeId node) {
  g.require_node(node);
  const std::size_t deg = g.degree(node);
  if (deg < 2) return 0.0;
  const auto nb = g.neighbors(node);
  // each triangle through `node` is seen once from each of its two other corners
  std::size_t twice_triangles = 0;
  for (NodeId w : nb) twice_triangles += sorted_intersection_size(nb, g.neighbors(w));
  return static_cast<double>(twice_triangles) / (static_cast<double>(deg) * (deg - 1));
}

GraphStats graph_stats(const AttributedGraph& g) {
  if (g.empty()) throw DomainError("graph_stats on an empty graph");
  GraphStats s;
  s.n = g.node_count();
  s.m = g.edge_count();
  s.average_degree = 2.0 * static_cast<double>(s.m) / static_cast<double>(s.n);
  double total = 0.0;
  for (NodeId u = 0; u < s.n; ++u) total += clustering_coefficient(g, u);
  s.average_clustering = total / static_cast<double>(s.n);
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const AttributedGraph& g) {
  std::map<std::size_t, std::size_t> counts;
  for (NodeId u = 0; u < g.node_count(); ++u) ++counts[g.degree(u)];
  return {counts.begin(), counts.end()};
}

void write_degree_histogram_csv(const AttributedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "degree,count\n";
  for (auto [degree, count] : degree_histogram(g)) out << degree << ',' << count << '\n';
}

}  // namespace linkpred
