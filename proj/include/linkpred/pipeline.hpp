#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkpred/classifiers.hpp"
#include "linkpred/dataset.hpp"
#include "linkpred/node2vec.hpp"

namespace linkpred {

struct NetworkSpec {
  std::string label;
  std::filesystem::path edges;
  std::filesystem::path attributes;
  bool seen = true;
};

struct PipelineConfig {
  std::filesystem::path output_dir = "linkpred-out";
  std::uint64_t seed = 1;
  std::vector<NetworkSpec> networks;
  std::vector<DatasetKind> datasets{DatasetKind::Baseline, DatasetKind::Topological,
                                    DatasetKind::Embedding};
  std::vector<ModelKind> models{ModelKind::LogReg, ModelKind::Svm, ModelKind::RandomForest,
                                ModelKind::Mlp};
  /// Preset name per "<dataset>.<model>"; missing entries use default_preset().
  std::map<std::string, std::string> presets;
  double positive_fraction = 0.02;
  double train_fraction = 0.8;
  WalkConfig walks;
  std::size_t rfecv_folds = 5;
  bool rfecv = true;
  std::size_t lda_sample_size = 200;
  std::size_t threads = 0;

  /// Checks paths, labels and value ranges; throws ConfigError.
  void validate() const;
  /// Stable hash over every setting except the output directory.
  std::string hash() const;
  const NetworkSpec* network(std::string_view label) const;
};

/// Parses the INI-style pipeline config. Relative paths are resolved against
/// the directory holding the file.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Preset used for a (dataset, model) cell when the config names none:
/// logreg-<dataset>, svm-linear (svm-gaussian for embedding), rf-default,
/// mlp-default.
std::string default_preset(DatasetKind dataset, ModelKind model);
std::string preset_for(const PipelineConfig& cfg, DatasetKind dataset, ModelKind model);

enum class Stage { Stats, Split, Embed, Build, Select, Train, Eval };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);
const std::vector<Stage>& all_stages();

/// Child seed of the master seed for a named stage or sub-stream.
std::uint64_t stage_seed(const PipelineConfig& cfg, std::string_view name);

/// Runs the stage, reading its inputs from earlier stages' artifacts under
/// cfg.output_dir. A missing input raises DependencyError naming the file.
void run_stage(const PipelineConfig& cfg, Stage stage);

/// Runs the given stages in order (all when empty). The DONE marker is removed
/// first and written back only after the eval stage succeeds.
void run_pipeline(const PipelineConfig& cfg, std::vector<Stage> stages = {});

/// Artifact locations under the output directory.
namespace artifacts {
std::filesystem::path stats_csv(const PipelineConfig& cfg);
std::filesystem::path degree_csv(const PipelineConfig& cfg, std::string_view network);
std::filesystem::path samples_csv(const PipelineConfig& cfg);
std::filesystem::path train_edges(const PipelineConfig& cfg, std::string_view network);
std::filesystem::path embedding_bin(const PipelineConfig& cfg, std::string_view network);
std::filesystem::path embedding_txt(const PipelineConfig& cfg, std::string_view network);
std::filesystem::path matrix_csv(const PipelineConfig& cfg, DatasetKind kind, Partition partition);
std::filesystem::path dataset_manifest(const PipelineConfig& cfg, DatasetKind kind);
std::filesystem::path selection_csv(const PipelineConfig& cfg, DatasetKind kind);
std::filesystem::path cv_scores_csv(const PipelineConfig& cfg, DatasetKind kind);
std::filesystem::path importance_csv(const PipelineConfig& cfg, DatasetKind kind);
std::filesystem::path correlation_csv(const PipelineConfig& cfg, DatasetKind kind);
std::filesystem::path model_file(const PipelineConfig& cfg, DatasetKind kind, ModelKind model);
std::filesystem::path results_csv(const PipelineConfig& cfg);
std::filesystem::path lda_csv(const PipelineConfig& cfg, DatasetKind kind);
std::filesystem::path stage_manifest(const PipelineConfig& cfg, Stage stage);
std::filesystem::path done_marker(const PipelineConfig& cfg);
}  // namespace artifacts

/// Writes a Facebook100-style edge list and attribute CSV for a synthetic
/// power-law cluster network.
void write_synthetic_network(const std::filesystem::path& edge_file,
                             const std::filesystem::path& attribute_file, std::size_t nodes,
                             std::size_t edges_per_node, double triad_p, std::uint64_t seed);

}  // namespace linkpred
