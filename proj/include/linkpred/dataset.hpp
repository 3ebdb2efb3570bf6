#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "linkpred/graph.hpp"
#include "linkpred/node2vec.hpp"

namespace linkpred {

enum class DatasetKind { Baseline, Topological, Embedding };
enum class Partition { Train, Test, Unseen };

std::string_view to_string(DatasetKind kind);
std::string_view to_string(Partition partition);
DatasetKind parse_dataset_kind(std::string_view text);
Partition parse_partition(std::string_view text);

struct SplitSpec {
  double positive_fraction = 0.02;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::vector<std::string> seen_networks;
  std::vector<std::string> unseen_networks;

  /// Throws DomainError when a fraction is outside (0, 1) or the label sets overlap.
  void validate() const;
};

/// Candidate pair with u < v. Label 1: held-out edge. Label 0: non-edge of the original graph.
struct NodePairSample {
  std::string network_id;
  NodeId u = 0;
  NodeId v = 0;
  int label = 0;

  bool operator==(const NodePairSample&) const = default;
};

struct SplitResult {
  AttributedGraph train_graph;
  std::vector<NodePairSample> positives;
  std::vector<NodePairSample> negatives;
};

/// Holds out round(positive_fraction * m) uniformly chosen edges as positives
/// and rejection-samples as many distinct non-adjacent pairs as negatives.
/// Negatives never touch E but may reuse nodes. Throws SamplingError after
/// 100x the target number of rejected draws.
SplitResult split_network(const AttributedGraph& g, const SplitSpec& spec);

/// Node-based (attribute) features of one pair.
struct PairFeatures {
  double same_dorm = 0;
  double same_year = 0;
  double year_diff = 0;
  double high_school_1 = 0;
  double high_school_2 = 0;
  double major_1 = 0;
  double major_2 = 0;
  double same_faculty = 0;
  double same_gender = 0;

  bool operator==(const PairFeatures&) const = default;
};

/// Column names of PairFeatures, in member order.
const std::vector<std::string>& pair_feature_names();
/// Values of PairFeatures in the order of pair_feature_names().
std::vector<double> pair_feature_values(const PairFeatures& f);

/// Mean class year over nodes with a known year (0 when none is known).
double known_year_mean(const AttributedGraph& g);

/// same_* flags are 0 whenever either side is missing; a missing year is
/// replaced by `year_mean` before differencing; code pairs are sorted ascending.
PairFeatures node_pair_features(const AttributedGraph& g, NodeId u, NodeId v, double year_mean);

/// Row-major numeric matrix with named columns and a 0/1 label per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> column_names, DatasetKind kind, Partition partition);

  /// Builds a matrix from explicit rows (kind/partition default to baseline/train).
  static FeatureMatrix from_rows(std::vector<std::string> column_names,
                                 const std::vector<std::vector<double>>& rows,
                                 std::vector<int> labels,
                                 DatasetKind kind = DatasetKind::Baseline,
                                 Partition partition = Partition::Train);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return column_names_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
  double& at(std::size_t i, std::size_t j) { return values_[i * cols() + j]; }
  std::vector<double> column(std::size_t j) const;

  const std::vector<std::string>& column_names() const noexcept { return column_names_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<double>& values() const noexcept { return values_; }
  DatasetKind kind() const noexcept { return kind_; }
  Partition partition() const noexcept { return partition_; }
  void set_partition(Partition p) noexcept { partition_ = p; }

  void append_row(std::span<const double> values, int label);
  /// Appends all rows of `other`, whose columns must match exactly.
  void append(const FeatureMatrix& other);

  /// Index of a column, or SchemaError.
  std::size_t column_index(std::string_view name) const;
  /// New matrix holding the named columns in the given order.
  FeatureMatrix select_columns(std::span<const std::string> names) const;
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

  std::size_t count_label(int label) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> column_names_;
  std::vector<double> values_;
  std::vector<int> labels_;
  DatasetKind kind_ = DatasetKind::Baseline;
  Partition partition_ = Partition::Train;
};

/// Topology column names: jc, aa, pa, rai.
const std::vector<std::string>& topology_feature_names();
/// Node-based columns kept alongside the Hadamard vector: same_year, same_dorm.
const std::vector<std::string>& embedding_node_feature_names();

/// Assembles one dataset for samples drawn from a single network.
///   baseline    : jc, aa, pa, rai (computed on g_train)
///   topological : baseline + the nine node-based pair features
///   embedding   : same_year, same_dorm, emb_0 .. emb_{D-1} (Hadamard)
/// The embedding table must be present iff kind == Embedding.
FeatureMatrix build_dataset(DatasetKind kind, std::span<const NodePairSample> samples,
                            const AttributedGraph& g_train, const EmbeddingTable* embeddings,
                            Partition partition);

/// Column-wise affine map fitted on training rows.
struct Standardizer {
  std::vector<std::string> column_names;
  std::vector<double> mean;
  std::vector<double> scale;

  FeatureMatrix apply(const FeatureMatrix& m) const;
  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);
};

/// Population mean/std of the train matrix; zero-variance columns keep scale 1.
Standardizer fit_standardizer(const FeatureMatrix& train);

struct StandardizedSet {
  FeatureMatrix train;
  std::vector<FeatureMatrix> others;
  Standardizer params;
};

StandardizedSet standardize(const FeatureMatrix& train, std::span<const FeatureMatrix> others);

/// Stratified seeded split of pooled samples into (train, test).
std::pair<std::vector<NodePairSample>, std::vector<NodePairSample>> train_test_split(
    std::vector<NodePairSample> samples, double train_fraction, std::uint64_t seed);

void write_feature_matrix_csv(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_feature_matrix_csv(const std::filesystem::path& path, DatasetKind kind,
                                      Partition partition);

/// CSV `network,u,v,label,partition` (original ids) and its reader.
struct PartitionedSample {
  NodePairSample sample;
  Partition partition = Partition::Train;
};
void write_samples_csv(std::span<const PartitionedSample> samples,
                       std::span<const AttributedGraph* const> graphs,
                       const std::filesystem::path& path);
std::vector<PartitionedSample> read_samples_csv(const std::filesystem::path& path,
                                                std::span<const AttributedGraph* const> graphs);

}  // namespace linkpred
