// linkpred: batch command line front end for the link-prediction pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "linkpred/classifiers.hpp"
#include "linkpred/errors.hpp"
#include "linkpred/evaluation.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/pipeline.hpp"

namespace {

using namespace linkpred;

struct Options {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
  std::vector<std::string> stages;
};

PipelineConfig resolve_config(const Options& opt) {
  if (opt.config.empty()) throw ConfigError("--config is required");
  auto cfg = load_pipeline_config(opt.config);
  if (!opt.output.empty()) cfg.output_dir = opt.output;
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

void setup_logging(const std::string& level) {
  auto logger = spdlog::stderr_color_mt("linkpred");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") {
    throw ConfigError(fmt::format("unknown log level '{}'", level));
  }
  spdlog::set_level(parsed);
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "Pipeline config file (INI)");
  cmd->add_option("--output", opt.output, "Output directory (overrides [pipeline] output)");
  cmd->add_option("--seed", opt.seed, "Master seed (overrides [pipeline] seed)");
}

int run(int argc, char** argv) {
  CLI::App app{"Link prediction on attributed social networks"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--log-level", opt.log_level, "trace, debug, info, warn, error, off")
      ->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "Run the pipeline (all stages unless --stages)");
  add_common(run_cmd, opt);
  run_cmd->add_option("--stages", opt.stages, "Comma-separated subset of stages")
      ->delimiter(',');

  std::vector<std::pair<CLI::App*, Stage>> stage_cmds;
  for (const auto stage : all_stages()) {
    auto* cmd = app.add_subcommand(std::string(to_string(stage)),
                                   fmt::format("Run only the '{}' stage", to_string(stage)));
    add_common(cmd, opt);
    stage_cmds.emplace_back(cmd, stage);
  }
  // eval can also score one saved model against one saved matrix
  std::string model_path, matrix_path, dataset = "baseline", partition = "test";
  for (auto& [cmd, stage] : stage_cmds) {
    if (stage != Stage::Eval) continue;
    cmd->add_option("--model", model_path, "Saved model file");
    cmd->add_option("--matrix", matrix_path, "Feature matrix CSV");
    cmd->add_option("--dataset", dataset, "Dataset kind of --matrix")->capture_default_str();
    cmd->add_option("--partition", partition, "Partition of --matrix")->capture_default_str();
  }

  std::string edges_out, attrs_out;
  std::size_t nodes = 3000, per_node = 8;
  double triad = 0.9;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a synthetic network in the input format");
  synth->add_option("--edges", edges_out, "Edge list to write")->required();
  synth->add_option("--attributes", attrs_out, "Attribute CSV to write")->required();
  synth->add_option("--nodes", nodes, "Node count")->capture_default_str();
  synth->add_option("--edges-per-node", per_node, "Attachment edges per new node")
      ->capture_default_str();
  synth->add_option("--triad-p", triad, "Triad formation probability")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::Config);
  }

  try {
    setup_logging(opt.log_level);
    if (synth->parsed()) {
      write_synthetic_network(edges_out, attrs_out, nodes, per_node, triad, synth_seed);
      return 0;
    }
    if (run_cmd->parsed()) {
      std::vector<Stage> stages;
      for (const auto& s : opt.stages) stages.push_back(parse_stage(s));
      run_pipeline(resolve_config(opt), stages);
      return 0;
    }
    for (const auto& [cmd, stage] : stage_cmds) {
      if (!cmd->parsed()) continue;
      if (stage == Stage::Eval && (!model_path.empty() || !matrix_path.empty())) {
        if (model_path.empty() || matrix_path.empty()) {
          throw ConfigError("eval: --model and --matrix must be given together");
        }
        const auto model = load_model(model_path);
        const auto m = read_feature_matrix_csv(matrix_path, parse_dataset_kind(dataset),
                                               parse_partition(partition));
        const auto report = evaluate(model, m.select_columns(model.feature_columns()));
        std::cout << "dataset,partition,model,auroc,f1,accuracy,n_pos,n_neg\n"
                  << results_csv_row(report) << '\n';
        return 0;
      }
      run_pipeline(resolve_config(opt), {stage});
      return 0;
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(ErrorCategory::Data);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
