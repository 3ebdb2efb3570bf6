#include "linkpred/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "linkpred/errors.hpp"
#include "linkpred/random.hpp"
#include "linkpred/similarity.hpp"
#include "text_io.hpp"

namespace linkpred {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Baseline: return "baseline";
    case DatasetKind::Topological: return "topological";
    case DatasetKind::Embedding: return "embedding";
  }
  return "?";
}

std::string_view to_string(Partition partition) {
  switch (partition) {
    case Partition::Train: return "train";
    case Partition::Test: return "test";
    case Partition::Unseen: return "unseen";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view text) {
  if (text == "baseline") return DatasetKind::Baseline;
  if (text == "topological") return DatasetKind::Topological;
  if (text == "embedding") return DatasetKind::Embedding;
  throw ConfigError(fmt::format("unknown dataset kind '{}'", text));
}

Partition parse_partition(std::string_view text) {
  if (text == "train") return Partition::Train;
  if (text == "test") return Partition::Test;
  if (text == "unseen") return Partition::Unseen;
  throw DataError(fmt::format("unknown partition '{}'", text));
}

void SplitSpec::validate() const {
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) {
    throw DomainError("positive_fraction must lie in (0, 1)");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("train_fraction must lie in (0, 1)");
  }
  for (const auto& s : seen_networks) {
    if (std::find(unseen_networks.begin(), unseen_networks.end(), s) != unseen_networks.end()) {
      throw DomainError(fmt::format("network '{}' is both seen and unseen", s));
    }
  }
}

// ---------------------------------------------------------------------------
// protocol

SplitResult split_network(const AttributedGraph& g, const SplitSpec& spec) {
  spec.validate();
  const double target = spec.positive_fraction * static_cast<double>(g.edge_count());
  if (target < 1.0) {
    throw DomainError(fmt::format("network '{}': {} x {} edges holds out no edge",
                                  g.network_id(), spec.positive_fraction, g.edge_count()));
  }
  const auto k = static_cast<std::size_t>(std::llround(target));
  Rng rng(derive_seed(spec.seed, g.network_id()));

  std::vector<Edge> edges = g.edges();
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(edges[i], edges[i + uniform_index(rng, edges.size() - i)]);
  }
  edges.resize(k);

  SplitResult out;
  out.positives.reserve(k);
  for (const Edge& e : edges) out.positives.push_back({g.network_id(), e.u, e.v, 1});

  const std::size_t n = g.node_count();
  const std::size_t max_draws = 100 * k;
  std::set<Edge> chosen;
  std::size_t draws = 0;
  while (chosen.size() < k) {
    if (draws++ >= max_draws || n < 2) {
      throw SamplingError(fmt::format(
          "network '{}': found {} of {} negative pairs after {} draws; graph too dense",
          g.network_id(), chosen.size(), k, max_draws));
    }
    const auto u = static_cast<NodeId>(uniform_index(rng, n));
    const auto v = static_cast<NodeId>(uniform_index(rng, n));
    if (u == v || g.has_edge(u, v)) continue;
    const Edge e = Edge{u, v}.canonical();
    if (chosen.insert(e).second) out.negatives.push_back({g.network_id(), e.u, e.v, 0});
  }
  out.train_graph = g.without_edges(edges);
  return out;
}

std::pair<std::vector<NodePairSample>, std::vector<NodePairSample>> train_test_split(
    std::vector<NodePairSample> samples, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("train_fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<NodePairSample> pos, neg;
  for (auto& s : samples) (s.label == 1 ? pos : neg).push_back(std::move(s));
  shuffle(pos, rng);
  shuffle(neg, rng);
  std::vector<NodePairSample> train, test;
  auto deal = [&](std::vector<NodePairSample>& group) {
    const auto cut = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(group.size())));
    train.insert(train.end(), group.begin(), group.begin() + cut);
    test.insert(test.end(), group.begin() + cut, group.end());
  };
  deal(pos);
  deal(neg);
  shuffle(train, rng);
  shuffle(test, rng);
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// pair features

const std::vector<std::string>& pair_feature_names() {
  static const std::vector<std::string> names{
      "same_dorm",  "same_year", "year_diff",    "high_school_1", "high_school_2",
      "major_1",    "major_2",   "same_faculty", "same_gender"};
  return names;
}

std::vector<double> pair_feature_values(const PairFeatures& f) {
  return {f.same_dorm, f.same_year, f.year_diff,    f.high_school_1, f.high_school_2,
          f.major_1,   f.major_2,   f.same_faculty, f.same_gender};
}

double known_year_mean(const AttributedGraph& g) {
  double sum = 0.0;
  std::size_t count = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (const auto y = g.attributes(u).year) {
      sum += *y;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

PairFeatures node_pair_features(const AttributedGraph& g, NodeId u, NodeId v, double year_mean) {
  g.require_node(u);
  g.require_node(v);
  const auto& a = g.attributes(u);
  const auto& b = g.attributes(v);
  auto same = [](int x, int y) { return x != 0 && y != 0 && x == y ? 1.0 : 0.0; };

  PairFeatures f;
  f.same_dorm = same(a.dorm, b.dorm);
  f.same_year = a.year && b.year && *a.year == *b.year ? 1.0 : 0.0;
  const double ya = a.year ? *a.year : year_mean;
  const double yb = b.year ? *b.year : year_mean;
  f.year_diff = std::abs(ya - yb);
  f.high_school_1 = std::min(a.high_school, b.high_school);
  f.high_school_2 = std::max(a.high_school, b.high_school);
  f.major_1 = std::min(a.major, b.major);
  f.major_2 = std::max(a.major, b.major);
  f.same_faculty = same(a.status, b.status);
  f.same_gender = same(a.gender, b.gender);
  return f;
}

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names, DatasetKind kind,
                             Partition partition)
    : column_names_(std::move(column_names)), kind_(kind), partition_(partition) {}

FeatureMatrix FeatureMatrix::from_rows(std::vector<std::string> column_names,
                                       const std::vector<std::vector<double>>& rows,
                                       std::vector<int> labels, DatasetKind kind,
                                       Partition partition) {
  if (rows.size() != labels.size()) {
    throw SchemaError(fmt::format("{} rows but {} labels", rows.size(), labels.size()));
  }
  FeatureMatrix m(std::move(column_names), kind, partition);
  for (std::size_t i = 0; i < rows.size(); ++i) m.append_row(rows[i], labels[i]);
  return m;
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
  return out;
}

void FeatureMatrix::append_row(std::span<const double> values, int label) {
  if (values.size() != cols()) {
    throw SchemaError(fmt::format("row of width {} appended to matrix of width {}", values.size(),
                                  cols()));
  }
  values_.insert(values_.end(), values.begin(), values.end());
  labels_.push_back(label);
}

void FeatureMatrix::append(const FeatureMatrix& other) {
  if (other.column_names_ != column_names_) {
    throw SchemaError("cannot append matrices with different columns");
  }
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
  auto it = std::find(column_names_.begin(), column_names_.end(), name);
  if (it == column_names_.end()) throw SchemaError(fmt::format("no column named '{}'", name));
  return static_cast<std::size_t>(it - column_names_.begin());
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(column_index(n));
  FeatureMatrix out({names.begin(), names.end()}, kind_, partition_);
  out.values_.reserve(rows() * idx.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t j : idx) out.values_.push_back(at(i, j));
  }
  out.labels_ = labels_;
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out(column_names_, kind_, partition_);
  out.values_.reserve(indices.size() * cols());
  for (std::size_t i : indices) out.append_row(row(i), labels_[i]);
  return out;
}

std::size_t FeatureMatrix::count_label(int label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

// ---------------------------------------------------------------------------
// dataset assembly

const std::vector<std::string>& topology_feature_names() {
  static const std::vector<std::string> names{"jc", "aa", "pa", "rai"};
  return names;
}

const std::vector<std::string>& embedding_node_feature_names() {
  static const std::vector<std::string> names{"same_year", "same_dorm"};
  return names;
}

FeatureMatrix build_dataset(DatasetKind kind, std::span<const NodePairSample> samples,
                            const AttributedGraph& g_train, const EmbeddingTable* embeddings,
                            Partition partition) {
  if ((kind == DatasetKind::Embedding) != (embeddings != nullptr)) {
    throw DomainError("an embedding table is required for, and only for, the embedding dataset");
  }
  if (embeddings && embeddings->node_count() != g_train.node_count()) {
    throw DomainError(fmt::format("embedding table covers {} nodes, graph has {}",
                                  embeddings->node_count(), g_train.node_count()));
  }
  std::vector<Edge> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.network_id.empty() && !g_train.network_id().empty() &&
        s.network_id != g_train.network_id()) {
      throw DomainError(fmt::format("sample from '{}' built against graph '{}'", s.network_id,
                                    g_train.network_id()));
    }
    g_train.require_node(s.u);
    g_train.require_node(s.v);
    pairs.push_back({s.u, s.v});
  }

  std::vector<std::string> columns;
  switch (kind) {
    case DatasetKind::Baseline:
      columns = topology_feature_names();
      break;
    case DatasetKind::Topological:
      columns = topology_feature_names();
      columns.insert(columns.end(), pair_feature_names().begin(), pair_feature_names().end());
      break;
    case DatasetKind::Embedding:
      columns = embedding_node_feature_names();
      for (std::size_t k = 0; k < embeddings->dimensions(); ++k) {
        columns.push_back(fmt::format("emb_{}", k));
      }
      break;
  }
  FeatureMatrix m(columns, kind, partition);

  std::vector<PairScore> topo;
  if (kind != DatasetKind::Embedding) topo = score_pairs(g_train, pairs);
  const double year_mean = known_year_mean(g_train);

  std::vector<double> row;
  row.reserve(columns.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    row.clear();
    if (kind != DatasetKind::Embedding) {
      row.insert(row.end(), {topo[i].jc, topo[i].aa, topo[i].pa, topo[i].rai});
    }
    const PairFeatures f = node_pair_features(g_train, s.u, s.v, year_mean);
    if (kind == DatasetKind::Topological) {
      const auto values = pair_feature_values(f);
      row.insert(row.end(), values.begin(), values.end());
    } else if (kind == DatasetKind::Embedding) {
      row.push_back(f.same_year);
      row.push_back(f.same_dorm);
      const auto h = edge_embedding(*embeddings, s.u, s.v);
      row.insert(row.end(), h.begin(), h.end());
    }
    for (double x : row) {
      if (!std::isfinite(x)) throw NumericError("non-finite feature value");
    }
    m.append_row(row, s.label);
  }
  return m;
}

// ---------------------------------------------------------------------------
// standardisation

Standardizer fit_standardizer(const FeatureMatrix& train) {
  if (train.empty()) throw DomainError("cannot standardise an empty training matrix");
  Standardizer s;
  s.column_names = train.column_names();
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += train.at(i, j);
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = train.at(i, j) - s.mean[j];
      var[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    // tolerate rounding noise on constant columns
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[j]))) s.scale[j] = sd;
  }
  return s;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& m) const {
  if (m.column_names() != column_names) {
    throw SchemaError("standardiser columns do not match the matrix columns");
  }
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean[j]) / scale[j];
  }
  return out;
}

nlohmann::json Standardizer::to_json() const {
  return {{"columns", column_names}, {"mean", mean}, {"scale", scale}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s;
  s.column_names = j.at("columns").get<std::vector<std::string>>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != s.column_names.size() || s.scale.size() != s.column_names.size()) {
    throw FormatError("standardiser parameters do not match its columns");
  }
  return s;
}

StandardizedSet standardize(const FeatureMatrix& train, std::span<const FeatureMatrix> others) {
  StandardizedSet out;
  out.params = fit_standardizer(train);
  out.train = out.params.apply(train);
  for (const auto& m : others) out.others.push_back(out.params.apply(m));
  return out;
}

// ---------------------------------------------------------------------------
// persistence

void write_feature_matrix_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  std::string line;
  for (const auto& name : m.column_names()) line += name + ',';
  out << line << "label\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    line.clear();
    for (double x : m.row(i)) {
      line += detail::exact(x);
      line += ',';
    }
    out << line << m.labels()[i] << '\n';
  }
}

FeatureMatrix read_feature_matrix_csv(const std::filesystem::path& path, DatasetKind kind,
                                      Partition partition) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open feature matrix '{}'", path.string()));
  const std::string file = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(file, 1, "missing header");
  const auto header = detail::split(detail::trim(line), ',');
  if (header.empty() || header.back() != "label") {
    throw ParseError(file, 1, "last column must be 'label'");
  }
  std::vector<std::string> names(header.begin(), header.end() - 1);
  FeatureMatrix m(names, kind, partition);
  std::vector<double> row(names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(detail::trim(line), ',');
    if (fields.size() != header.size()) {
      throw ParseError(file, line_no, fmt::format("expected {} fields", header.size()));
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (!detail::parse_double(fields[j], row[j])) {
        throw ParseError(file, line_no, fmt::format("bad number '{}'", fields[j]));
      }
    }
    int label = 0;
    if (!detail::parse_int(fields.back(), label) || (label != 0 && label != 1)) {
      throw ParseError(file, line_no, "label must be 0 or 1");
    }
    m.append_row(row, label);
  }
  return m;
}

namespace {

const AttributedGraph& graph_for(std::span<const AttributedGraph* const> graphs,
                                 std::string_view id) {
  for (const auto* g : graphs) {
    if (g->network_id() == id) return *g;
  }
  throw ReferentialError(fmt::format("sample refers to unknown network '{}'", id));
}

}  // namespace

void write_samples_csv(std::span<const PartitionedSample> samples,
                       std::span<const AttributedGraph* const> graphs,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "network,u,v,label,partition\n";
  for (const auto& [s, part] : samples) {
    const auto& g = graph_for(graphs, s.network_id);
    out << fmt::format("{},{},{},{},{}\n", s.network_id, g.original_id(s.u), g.original_id(s.v),
                       s.label, to_string(part));
  }
}

std::vector<PartitionedSample> read_samples_csv(const std::filesystem::path& path,
                                                std::span<const AttributedGraph* const> graphs) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open samples file '{}'", path.string()));
  const std::string file = path.string();
  std::string line;
  std::getline(in, line);
  if (detail::trim(line) != "network,u,v,label,partition") {
    throw ParseError(file, 1, "unexpected samples header");
  }
  std::vector<PartitionedSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(detail::trim(line), ',');
    std::int64_t a = 0, b = 0;
    int label = 0;
    if (f.size() != 5 || !detail::parse_int(f[1], a) || !detail::parse_int(f[2], b) ||
        !detail::parse_int(f[3], label)) {
      throw ParseError(file, line_no, "malformed sample row");
    }
    const auto& g = graph_for(graphs, f[0]);
    const auto u = g.dense_id(a);
    const auto v = g.dense_id(b);
    if (!u || !v) throw ReferentialError(fmt::format("{}:{}: unknown node id", file, line_no));
    out.push_back({{std::string(f[0]), *u, *v, label}, parse_partition(f[4])});
  }
  return out;
}

}  // namespace linkpred
