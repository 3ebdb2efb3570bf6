#include "linkpred/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "linkpred/errors.hpp"
#include "linkpred/evaluation.hpp"
#include "linkpred/feature_selection.hpp"
#include "linkpred/generators.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/random.hpp"

namespace linkpred {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<std::string_view, Stage>, 7> kStages{{
    {"stats", Stage::Stats},
    {"split", Stage::Split},
    {"embed", Stage::Embed},
    {"build", Stage::Build},
    {"select", Stage::Select},
    {"train", Stage::Train},
    {"eval", Stage::Eval},
}};

}  // namespace

std::string_view to_string(Stage stage) {
  for (const auto& [name, s] : kStages) {
    if (s == stage) return name;
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (const auto& [name, s] : kStages) {
    if (name == text) return s;
  }
  throw ConfigError(fmt::format("unknown stage '{}' (stages: stats, split, embed, build, select, "
                                "train, eval)", text));
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::Stats, Stage::Split,  Stage::Embed, Stage::Build,
                                         Stage::Select, Stage::Train, Stage::Eval};
  return stages;
}

std::uint64_t stage_seed(const PipelineConfig& cfg, std::string_view name) {
  return derive_seed(cfg.seed, name);
}

namespace {

std::string_view stage_dir(Stage stage) {
  switch (stage) {
    case Stage::Build: return "datasets";
    case Stage::Train: return "models";
    case Stage::Eval: return "results";
    default: return to_string(stage);
  }
}

}  // namespace

namespace artifacts {

fs::path stats_csv(const PipelineConfig& cfg) { return cfg.output_dir / "stats" / "graph_stats.csv"; }
fs::path degree_csv(const PipelineConfig& cfg, std::string_view network) {
  return cfg.output_dir / "stats" / fmt::format("degree_{}.csv", network);
}
fs::path samples_csv(const PipelineConfig& cfg) { return cfg.output_dir / "split" / "samples.csv"; }
fs::path train_edges(const PipelineConfig& cfg, std::string_view network) {
  return cfg.output_dir / "split" / fmt::format("{}.train_edges.txt", network);
}
fs::path embedding_bin(const PipelineConfig& cfg, std::string_view network) {
  return cfg.output_dir / "embed" / fmt::format("{}.emb.bin", network);
}
fs::path embedding_txt(const PipelineConfig& cfg, std::string_view network) {
  return cfg.output_dir / "embed" / fmt::format("{}.emb.txt", network);
}
fs::path matrix_csv(const PipelineConfig& cfg, DatasetKind kind, Partition partition) {
  return cfg.output_dir / "datasets" / fmt::format("{}_{}.csv", to_string(kind), to_string(partition));
}
fs::path dataset_manifest(const PipelineConfig& cfg, DatasetKind kind) {
  return cfg.output_dir / "datasets" / fmt::format("{}.json", to_string(kind));
}
fs::path selection_csv(const PipelineConfig& cfg, DatasetKind kind) {
  return cfg.output_dir / "select" / fmt::format("{}_selection.csv", to_string(kind));
}
fs::path cv_scores_csv(const PipelineConfig& cfg, DatasetKind kind) {
  return cfg.output_dir / "select" / fmt::format("{}_cv_scores.csv", to_string(kind));
}
fs::path importance_csv(const PipelineConfig& cfg, DatasetKind kind) {
  return cfg.output_dir / "select" / fmt::format("{}_rf_importance.csv", to_string(kind));
}
fs::path correlation_csv(const PipelineConfig& cfg, DatasetKind kind) {
  return cfg.output_dir / "select" / fmt::format("{}_correlation.csv", to_string(kind));
}
fs::path model_file(const PipelineConfig& cfg, DatasetKind kind, ModelKind model) {
  return cfg.output_dir / "models" / fmt::format("{}_{}.lpm", to_string(kind), to_string(model));
}
fs::path results_csv(const PipelineConfig& cfg) { return cfg.output_dir / "results" / "results.csv"; }
fs::path lda_csv(const PipelineConfig& cfg, DatasetKind kind) {
  return cfg.output_dir / "results" / fmt::format("lda_{}.csv", to_string(kind));
}
fs::path stage_manifest(const PipelineConfig& cfg, Stage stage) {
  return cfg.output_dir / std::string(stage_dir(stage)) / "manifest.json";
}
fs::path done_marker(const PipelineConfig& cfg) { return cfg.output_dir / "DONE"; }

}  // namespace artifacts

namespace {

void require(const fs::path& path, Stage producer) {
  if (!fs::exists(path)) {
    throw DependencyError(fmt::format("missing input '{}'; run the '{}' stage first",
                                      path.string(), to_string(producer)));
  }
}

/// Records every file a stage wrote together with the config hash and seeds.
class Manifest {
 public:
  Manifest(const PipelineConfig& cfg, Stage stage) : cfg_(cfg), stage_(stage) {
    fs::create_directories(artifacts::stage_manifest(cfg, stage).parent_path());
  }

  void add(const fs::path& file, std::uint64_t seed) {
    files_.push_back({{"file", fs::relative(file, cfg_.output_dir).generic_string()},
                      {"seed", seed}});
  }

  void write() const {
    nlohmann::json j{{"stage", to_string(stage_)},
                     {"config_hash", cfg_.hash()},
                     {"master_seed", cfg_.seed},
                     {"files", files_}};
    std::ofstream out(artifacts::stage_manifest(cfg_, stage_));
    out << j.dump(2) << '\n';
    if (!out) throw DataError("cannot write stage manifest");
  }

 private:
  const PipelineConfig& cfg_;
  Stage stage_;
  nlohmann::json::array_t files_;
};

AttributedGraph load_original(const NetworkSpec& net) {
  return load_graph(net.edges, net.attributes, net.label);
}

AttributedGraph load_train_graph(const PipelineConfig& cfg, const NetworkSpec& net) {
  const auto path = artifacts::train_edges(cfg, net.label);
  require(path, Stage::Split);
  return load_graph(path, net.attributes, net.label);
}

std::vector<AttributedGraph> load_train_graphs(const PipelineConfig& cfg) {
  std::vector<AttributedGraph> graphs;
  for (const auto& net : cfg.networks) graphs.push_back(load_train_graph(cfg, net));
  return graphs;
}

std::vector<const AttributedGraph*> pointers(const std::vector<AttributedGraph>& graphs) {
  std::vector<const AttributedGraph*> out;
  for (const auto& g : graphs) out.push_back(&g);
  return out;
}

bool has_unseen(const PipelineConfig& cfg) {
  return std::any_of(cfg.networks.begin(), cfg.networks.end(),
                     [](const NetworkSpec& n) { return !n.seen; });
}

bool wants(const PipelineConfig& cfg, DatasetKind kind) {
  return std::find(cfg.datasets.begin(), cfg.datasets.end(), kind) != cfg.datasets.end();
}

std::vector<Partition> eval_partitions(const PipelineConfig& cfg) {
  std::vector<Partition> parts{Partition::Test};
  if (has_unseen(cfg)) parts.push_back(Partition::Unseen);
  return parts;
}

// ---------------------------------------------------------------------------

void stage_stats(const PipelineConfig& cfg) {
  Manifest manifest(cfg, Stage::Stats);
  std::ofstream out(artifacts::stats_csv(cfg));
  if (!out) throw DataError("cannot write graph stats");
  out << "network,role,n,m,average_degree,average_clustering\n";
  for (const auto& net : cfg.networks) {
    const auto g = load_original(net);
    const auto s = graph_stats(g);
    out << fmt::format("{},{},{},{},{:.6f},{:.6f}\n", net.label, net.seen ? "seen" : "unseen",
                       s.n, s.m, s.average_degree, s.average_clustering);
    write_degree_histogram_csv(g, artifacts::degree_csv(cfg, net.label));
    manifest.add(artifacts::degree_csv(cfg, net.label), 0);
    spdlog::info("stats: {} n={} m={} C={:.4f}", net.label, s.n, s.m, s.average_clustering);
  }
  out.close();
  manifest.add(artifacts::stats_csv(cfg), 0);
  manifest.write();
}

void stage_split(const PipelineConfig& cfg) {
  Manifest manifest(cfg, Stage::Split);
  SplitSpec spec;
  spec.positive_fraction = cfg.positive_fraction;
  spec.train_fraction = cfg.train_fraction;
  spec.seed = stage_seed(cfg, "split");
  for (const auto& net : cfg.networks) {
    (net.seen ? spec.seen_networks : spec.unseen_networks).push_back(net.label);
  }
  spec.validate();

  std::vector<AttributedGraph> originals;
  std::vector<NodePairSample> pooled;
  std::vector<PartitionedSample> unseen;
  for (const auto& net : cfg.networks) {
    originals.push_back(load_original(net));
    auto result = split_network(originals.back(), spec);
    write_edge_file(result.train_graph, artifacts::train_edges(cfg, net.label));
    manifest.add(artifacts::train_edges(cfg, net.label), spec.seed);
    spdlog::info("split: {} holds out {} positives, {} negatives", net.label,
                 result.positives.size(), result.negatives.size());
    for (auto* group : {&result.positives, &result.negatives}) {
      for (auto& s : *group) {
        if (net.seen) pooled.push_back(std::move(s));
        else unseen.push_back({std::move(s), Partition::Unseen});
      }
    }
  }
  const auto split_seed = stage_seed(cfg, "train-test");
  auto [train, test] = train_test_split(std::move(pooled), cfg.train_fraction, split_seed);
  std::vector<PartitionedSample> all;
  for (auto& s : train) all.push_back({std::move(s), Partition::Train});
  for (auto& s : test) all.push_back({std::move(s), Partition::Test});
  for (auto& s : unseen) all.push_back(std::move(s));
  write_samples_csv(all, pointers(originals), artifacts::samples_csv(cfg));
  manifest.add(artifacts::samples_csv(cfg), split_seed);
  manifest.write();
}

void stage_embed(const PipelineConfig& cfg) {
  Manifest manifest(cfg, Stage::Embed);
  if (!wants(cfg, DatasetKind::Embedding)) {
    spdlog::info("embed: embedding dataset not requested; nothing to do");
    manifest.write();
    return;
  }
  for (const auto& net : cfg.networks) {
    const auto g = load_train_graph(cfg, net);
    WalkConfig w = cfg.walks;
    w.seed = stage_seed(cfg, "node2vec:" + net.label);
    WalkReport report;
    const auto table = node2vec(g, w, &report);
    if (!report.isolated_nodes.empty()) {
      spdlog::warn("embed: {} has {} isolated nodes in G_train; they get zero vectors", net.label,
                   report.isolated_nodes.size());
    }
    write_embeddings_binary(table, artifacts::embedding_bin(cfg, net.label));
    write_embeddings_text(table, artifacts::embedding_txt(cfg, net.label));
    manifest.add(artifacts::embedding_bin(cfg, net.label), w.seed);
    manifest.add(artifacts::embedding_txt(cfg, net.label), w.seed);
    spdlog::info("embed: {} walks={} dims={}", net.label, report.walk_count, w.dimensions);
  }
  manifest.write();
}

void stage_build(const PipelineConfig& cfg) {
  Manifest manifest(cfg, Stage::Build);
  const auto graphs = load_train_graphs(cfg);
  require(artifacts::samples_csv(cfg), Stage::Split);
  const auto samples = read_samples_csv(artifacts::samples_csv(cfg), pointers(graphs));

  std::vector<EmbeddingTable> tables;
  if (wants(cfg, DatasetKind::Embedding)) {
    for (const auto& net : cfg.networks) {
      const auto path = artifacts::embedding_bin(cfg, net.label);
      require(path, Stage::Embed);
      tables.push_back(read_embeddings_binary(path));
    }
  }

  const Partition parts[] = {Partition::Train, Partition::Test, Partition::Unseen};
  for (const auto kind : cfg.datasets) {
    std::vector<FeatureMatrix> matrices;
    for (const auto part : parts) {
      std::optional<FeatureMatrix> merged;
      for (std::size_t k = 0; k < cfg.networks.size(); ++k) {
        std::vector<NodePairSample> group;
        for (const auto& s : samples) {
          if (s.partition == part && s.sample.network_id == cfg.networks[k].label) {
            group.push_back(s.sample);
          }
        }
        const EmbeddingTable* table = kind == DatasetKind::Embedding ? &tables[k] : nullptr;
        auto m = build_dataset(kind, group, graphs[k], table, part);
        if (!merged) merged = std::move(m);
        else merged->append(m);
      }
      merged->set_partition(part);
      matrices.push_back(std::move(*merged));
    }
    if (matrices[0].empty()) throw DomainError("build: the train partition is empty");
    const std::vector<FeatureMatrix> others{matrices[1], matrices[2]};
    const auto set = standardize(matrices[0], others);

    const std::uint64_t seed = stage_seed(cfg, "split");
    write_feature_matrix_csv(set.train, artifacts::matrix_csv(cfg, kind, Partition::Train));
    manifest.add(artifacts::matrix_csv(cfg, kind, Partition::Train), seed);
    write_feature_matrix_csv(set.others[0], artifacts::matrix_csv(cfg, kind, Partition::Test));
    manifest.add(artifacts::matrix_csv(cfg, kind, Partition::Test), seed);
    if (has_unseen(cfg)) {
      write_feature_matrix_csv(set.others[1], artifacts::matrix_csv(cfg, kind, Partition::Unseen));
      manifest.add(artifacts::matrix_csv(cfg, kind, Partition::Unseen), seed);
    }
    nlohmann::json j{{"kind", to_string(kind)},
                     {"config_hash", cfg.hash()},
                     {"seed", seed},
                     {"columns", set.train.column_names()},
                     {"rows",
                      {{"train", set.train.rows()},
                       {"test", set.others[0].rows()},
                       {"unseen", set.others[1].rows()}}},
                     {"standardization", set.params.to_json()}};
    std::ofstream(artifacts::dataset_manifest(cfg, kind)) << j.dump(2) << '\n';
    manifest.add(artifacts::dataset_manifest(cfg, kind), seed);
    spdlog::info("build: {} train={} test={} unseen={} columns={}", to_string(kind),
                 set.train.rows(), set.others[0].rows(), set.others[1].rows(),
                 set.train.cols());
  }
  manifest.write();
}

FeatureMatrix read_matrix(const PipelineConfig& cfg, DatasetKind kind, Partition part) {
  const auto path = artifacts::matrix_csv(cfg, kind, part);
  require(path, Stage::Build);
  return read_feature_matrix_csv(path, kind, part);
}

void stage_select(const PipelineConfig& cfg) {
  Manifest manifest(cfg, Stage::Select);
  for (const auto kind : cfg.datasets) {
    const auto train = read_matrix(cfg, kind, Partition::Train);
    SelectionReport report;
    const auto seed = stage_seed(cfg, fmt::format("rfecv:{}", to_string(kind)));
    // the embedding dataset keeps its fixed column set
    if (kind == DatasetKind::Embedding || !cfg.rfecv || train.cols() < 2) {
      report.ranking = train.column_names();
      report.selected = train.column_names();
    } else {
      report = rfecv(train, cfg.rfecv_folds, seed, model_preset("svm-linear").config, cfg.threads);
      spdlog::info("select: {} keeps {} of {} columns", to_string(kind), report.selected.size(),
                   train.cols());
    }
    write_selection_csv(report, artifacts::selection_csv(cfg, kind));
    manifest.add(artifacts::selection_csv(cfg, kind), seed);
    if (!report.cv_scores.empty()) {
      write_cv_scores_csv(report, artifacts::cv_scores_csv(cfg, kind));
      manifest.add(artifacts::cv_scores_csv(cfg, kind), seed);
    }

    ModelConfig forest = model_preset("rf-default").config;
    forest.seed = stage_seed(cfg, fmt::format("importance:{}", to_string(kind)));
    forest.threads = cfg.threads;
    write_importance_csv(rf_importance(train, forest), artifacts::importance_csv(cfg, kind));
    manifest.add(artifacts::importance_csv(cfg, kind), forest.seed);
    write_correlation_csv(correlation_matrix(train), artifacts::correlation_csv(cfg, kind));
    manifest.add(artifacts::correlation_csv(cfg, kind), 0);
  }
  manifest.write();
}

std::vector<std::string> selected_columns(const PipelineConfig& cfg, DatasetKind kind,
                                          const FeatureMatrix& m) {
  const auto path = artifacts::selection_csv(cfg, kind);
  require(path, Stage::Select);
  return read_selected_columns(path, m.column_names());
}

void stage_train(const PipelineConfig& cfg) {
  Manifest manifest(cfg, Stage::Train);
  for (const auto kind : cfg.datasets) {
    const auto full = read_matrix(cfg, kind, Partition::Train);
    const auto columns = selected_columns(cfg, kind, full);
    const auto train = full.select_columns(columns);
    for (const auto model : cfg.models) {
      const auto name = preset_for(cfg, kind, model);
      ModelConfig mc = model_preset(name).config;
      mc.seed = stage_seed(cfg, fmt::format("train:{}:{}", to_string(kind), to_string(model)));
      mc.threads = cfg.threads;
      spdlog::info("train: {} / {} ({})", to_string(kind), to_string(model), name);
      const auto trained = train_model(model, train, mc);
      save_model(trained, artifacts::model_file(cfg, kind, model));
      manifest.add(artifacts::model_file(cfg, kind, model), mc.seed);
    }
  }
  manifest.write();
}

void stage_eval(const PipelineConfig& cfg) {
  Manifest manifest(cfg, Stage::Eval);
  std::vector<EvalReport> rows;
  for (const auto kind : cfg.datasets) {
    std::vector<FeatureMatrix> parts;
    for (const auto p : eval_partitions(cfg)) parts.push_back(read_matrix(cfg, kind, p));
    for (const auto model : cfg.models) {
      const auto path = artifacts::model_file(cfg, kind, model);
      require(path, Stage::Train);
      const auto trained = load_model(path);
      for (const auto& m : parts) {
        rows.push_back(evaluate(trained, m.select_columns(trained.feature_columns())));
        spdlog::info("eval: {}", results_csv_row(rows.back()));
      }
    }

    const auto& test = parts.front();
    const auto probe_input = test.select_columns(selected_columns(cfg, kind, test));
    const auto seed = stage_seed(cfg, fmt::format("lda:{}", to_string(kind)));
    const auto probe =
        lda_probe(probe_input, std::min(cfg.lda_sample_size, probe_input.rows()), seed);
    write_lda_csv(probe, artifacts::lda_csv(cfg, kind));
    manifest.add(artifacts::lda_csv(cfg, kind), seed);
    spdlog::info("eval: {} LDA probe accuracy {:.4f}", to_string(kind), probe.train_accuracy);
  }
  write_results_csv(rows, artifacts::results_csv(cfg));
  manifest.add(artifacts::results_csv(cfg), cfg.seed);
  manifest.write();
}

}  // namespace

void run_stage(const PipelineConfig& cfg, Stage stage) {
  fs::create_directories(artifacts::stage_manifest(cfg, stage).parent_path());
  switch (stage) {
    case Stage::Stats: return stage_stats(cfg);
    case Stage::Split: return stage_split(cfg);
    case Stage::Embed: return stage_embed(cfg);
    case Stage::Build: return stage_build(cfg);
    case Stage::Select: return stage_select(cfg);
    case Stage::Train: return stage_train(cfg);
    case Stage::Eval: return stage_eval(cfg);
  }
}

void run_pipeline(const PipelineConfig& cfg, std::vector<Stage> stages) {
  cfg.validate();
  if (stages.empty()) stages = all_stages();
  fs::create_directories(cfg.output_dir);
  fs::remove(artifacts::done_marker(cfg));
  for (const auto stage : stages) {
    spdlog::info("stage '{}' starting", to_string(stage));
    try {
      run_stage(cfg, stage);
    } catch (const std::exception& e) {
      spdlog::error("stage '{}' failed: {}", to_string(stage), e.what());
      throw;
    }
  }
  if (std::find(stages.begin(), stages.end(), Stage::Eval) != stages.end()) {
    std::ofstream(artifacts::done_marker(cfg)) << "ok\n";
  }
}

void write_synthetic_network(const fs::path& edge_file, const fs::path& attribute_file,
                             std::size_t nodes, std::size_t edges_per_node, double triad_p,
                             std::uint64_t seed) {
  const auto topology = powerlaw_cluster(nodes, edges_per_node, triad_p, seed, "synthetic");
  const auto g = with_attributes(topology, synthetic_attributes(nodes, derive_seed(seed, "attributes")));
  if (edge_file.has_parent_path()) fs::create_directories(edge_file.parent_path());
  if (attribute_file.has_parent_path()) fs::create_directories(attribute_file.parent_path());
  write_edge_file(g, edge_file);
  write_attribute_file(g, attribute_file);
}

}  // namespace linkpred
