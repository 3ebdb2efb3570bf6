#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linkpred/graph.hpp"

namespace linkpred {

/// Walk and skip-gram hyperparameters. Defaults are the tuned social-network
/// setting (64 dims, 50 walks of 20 nodes, p = 1, q = 0.8); the skip-gram
/// settings follow the usual node2vec reference values.
struct WalkConfig {
  std::size_t dimensions = 64;
  std::size_t walks_per_node = 50;
  std::size_t walk_length = 20;
  double return_p = 1.0;
  double in_out_q = 0.8;
  std::size_t window = 10;
  std::size_t negatives_per_positive = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
  /// Worker threads. Walk generation is deterministic for any value; training
  /// is bitwise reproducible only with 1 (sequential mode).
  std::size_t threads = 1;

  /// Throws DomainError on dimensions < 1, walk_length < 2, p <= 0 or q <= 0.
  void validate() const;
  bool operator==(const WalkConfig&) const = default;
};

struct Walk {
  std::vector<NodeId> nodes;
};

struct WalkReport {
  std::size_t walk_count = 0;
  /// Degree-0 nodes, which start no walks.
  std::vector<NodeId> isolated_nodes;
};

/// Second-order biased random walks: from current node v reached via t, a
/// neighbour x has weight 1/p if x == t, 1 if x is adjacent to t, 1/q
/// otherwise. The first step is uniform. Output order is round-major
/// (walks_per_node rounds, each over a seeded permutation of start nodes).
std::vector<Walk> generate_walks(const AttributedGraph& g, const WalkConfig& cfg,
                                 WalkReport* report = nullptr);

/// Dense per-node vectors, row-major.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t node_count, std::size_t dimensions, WalkConfig config = {},
                 std::string network_id = {});

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t dimensions() const noexcept { return dimensions_; }
  std::span<const double> vector(NodeId u) const {
    return {values_.data() + static_cast<std::size_t>(u) * dimensions_, dimensions_};
  }
  std::span<double> vector(NodeId u) {
    return {values_.data() + static_cast<std::size_t>(u) * dimensions_, dimensions_};
  }
  const std::vector<double>& values() const noexcept { return values_; }
  const WalkConfig& config() const noexcept { return config_; }
  const std::string& network_id() const noexcept { return network_id_; }
  void set_network_id(std::string id) { network_id_ = std::move(id); }

  bool operator==(const EmbeddingTable&) const = default;

 private:
  std::size_t node_count_ = 0;
  std::size_t dimensions_ = 0;
  std::vector<double> values_;
  WalkConfig config_;
  std::string network_id_;
};

/// Loss and gradients of one skip-gram negative-sampling term
///   -log s(c . o) - sum_k log s(-c . n_k)
/// with respect to the centre (input) vector and each output vector.
struct SkipGramGradient {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

SkipGramGradient skipgram_loss_and_gradient(std::span<const double> center,
                                            std::span<const double> context,
                                            std::span<const std::vector<double>> negatives);

/// One (centre, context, negatives) training example.
struct SkipGramExample {
  NodeId center = 0;
  NodeId context = 0;
  std::vector<NodeId> negatives;
};

/// Skip-gram with negative sampling over walk co-occurrences. Negatives come
/// from the walk-token unigram distribution raised to 3/4; the learning rate
/// decays linearly to 1e-4 of its initial value over all epochs.
class SkipGramTrainer {
 public:
  SkipGramTrainer(std::span<const Walk> walks, const WalkConfig& cfg, std::size_t node_count);

  void run_epoch();
  std::size_t epochs_run() const noexcept { return epochs_run_; }

  /// Mean SGNS loss of the current parameters over a fixed batch.
  double mean_loss(std::span<const SkipGramExample> batch) const;
  /// Draws a reproducible batch of training examples from the walks.
  std::vector<SkipGramExample> sample_examples(std::size_t count, std::uint64_t seed) const;

  /// Input vectors; nodes that never occur in a walk get the zero vector.
  EmbeddingTable embeddings(std::string network_id = {}) const;

 private:
  template <bool Shared>
  void train_range(std::size_t first_walk, std::size_t last_walk, std::uint64_t stream,
                   std::size_t& processed);

  std::span<const Walk> walks_;
  WalkConfig cfg_;
  std::size_t node_count_;
  std::vector<double> input_;
  std::vector<double> output_;
  std::vector<bool> seen_;
  std::vector<double> unigram_;
  std::size_t total_tokens_ = 0;
  std::size_t processed_ = 0;
  std::size_t epochs_run_ = 0;
};

/// Generates no walks itself: trains on the given walks for cfg.epochs epochs.
/// Throws DomainError on an empty walk list.
EmbeddingTable train_embeddings(std::span<const Walk> walks, const WalkConfig& cfg,
                                std::size_t node_count, std::string network_id = {});

/// Walks + training in one call.
EmbeddingTable node2vec(const AttributedGraph& g, const WalkConfig& cfg,
                        WalkReport* report = nullptr);

/// Hadamard (elementwise) product of the two node vectors.
std::vector<double> edge_embedding(const EmbeddingTable& table, NodeId u, NodeId v);

struct GridEntry {
  WalkConfig config;
  std::optional<double> score;  // empty when the config failed
  std::string failure;
  std::size_t rank = 0;         // 1-based; 0 for failed configs
};

using EmbeddingEvaluator = std::function<double(const EmbeddingTable&)>;

/// Trains every config and ranks by evaluator score, descending; equal scores
/// prefer fewer dimensions. A config whose training or evaluation throws is
/// recorded as failed and ranked after all successes.
std::vector<GridEntry> grid_search_embeddings(const AttributedGraph& g,
                                              std::span<const WalkConfig> grid,
                                              const EmbeddingEvaluator& evaluator);

/// CSV `dims,walks,length,p,q,score,rank`.
void write_grid_report_csv(std::span<const GridEntry> entries, const std::filesystem::path& path);

void write_embeddings_text(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable read_embeddings_text(const std::filesystem::path& path);
void write_embeddings_binary(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable read_embeddings_binary(const std::filesystem::path& path);

}  // namespace linkpred
