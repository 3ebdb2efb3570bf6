#include <algorithm>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "linkpred/errors.hpp"
#include "linkpred/pipeline.hpp"
#include "linkpred/random.hpp"
#include "text_io.hpp"

namespace linkpred {

namespace {

namespace pt = boost::property_tree;

class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {
    for (const auto& [key, child] : tree_) {
      if (!child.empty()) {
        throw ConfigError(fmt::format("[{}]: nested key '{}' is not allowed", name_, key));
      }
    }
  }

  /// Rejects keys outside `allowed`, which catches typos early.
  void allow(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, child] : tree_) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError(fmt::format("[{}]: unknown key '{}' (expected one of {})", name_, key,
                                      fmt::join(allowed, ", ")));
      }
    }
  }

  std::optional<std::string> text(std::string_view key) const {
    for (const auto& [k, child] : tree_) {
      if (k == key) return std::string(detail::trim(child.data()));
    }
    return std::nullopt;
  }

  template <class Int>
  void read_int(std::string_view key, Int& out) const {
    if (auto t = text(key)) {
      if (!detail::parse_int(*t, out)) throw bad(key, *t, "an integer");
    }
  }

  void read_double(std::string_view key, double& out) const {
    if (auto t = text(key)) {
      if (!detail::parse_double(*t, out)) throw bad(key, *t, "a number");
    }
  }

  void read_bool(std::string_view key, bool& out) const {
    if (auto t = text(key)) {
      if (*t == "true" || *t == "yes" || *t == "1" || *t == "on") out = true;
      else if (*t == "false" || *t == "no" || *t == "0" || *t == "off") out = false;
      else throw bad(key, *t, "a boolean");
    }
  }

  std::vector<std::string> list(std::string_view key) const {
    std::vector<std::string> out;
    if (auto t = text(key)) {
      for (auto item : detail::split(*t, ',')) {
        item = detail::trim(item);
        if (!item.empty()) out.emplace_back(item);
      }
    }
    return out;
  }

  const pt::ptree& tree() const { return tree_; }
  const std::string& name() const { return name_; }

 private:
  ConfigError bad(std::string_view key, std::string_view value, std::string_view what) const {
    return ConfigError(fmt::format("[{}] {} = '{}' is not {}", name_, key, value, what));
  }

  std::string name_;
  const pt::ptree& tree_;
};

template <class F>
auto as_config_error(std::string_view where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError(fmt::format("config file '{}' does not exist", path.string()));
  }
  pt::ptree root;
  try {
    pt::read_ini(path.string(), root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("cannot parse config: {}", e.what()));
  }
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : (base / q).lexically_normal();
  };

  PipelineConfig cfg;
  for (const auto& [name, tree] : root) {
    if (tree.empty() && !tree.data().empty()) {
      throw ConfigError(fmt::format("key '{}' appears outside any section", name));
    }
    const Section s(name, tree);
    if (name == "pipeline") {
      s.allow({"output", "seed", "datasets", "models", "threads"});
      if (auto t = s.text("output")) cfg.output_dir = resolve(*t);
      s.read_int("seed", cfg.seed);
      s.read_int("threads", cfg.threads);
      if (s.text("datasets")) {
        cfg.datasets.clear();
        for (const auto& d : s.list("datasets")) {
          cfg.datasets.push_back(as_config_error("[pipeline] datasets", [&] {
            return parse_dataset_kind(d);
          }));
        }
      }
      if (s.text("models")) {
        cfg.models.clear();
        for (const auto& m : s.list("models")) cfg.models.push_back(parse_model_kind(m));
      }
    } else if (name == "split") {
      s.allow({"positive_fraction", "train_fraction"});
      s.read_double("positive_fraction", cfg.positive_fraction);
      s.read_double("train_fraction", cfg.train_fraction);
    } else if (name == "node2vec") {
      s.allow({"dimensions", "walks_per_node", "walk_length", "p", "q", "window", "negatives",
               "epochs", "learning_rate", "threads"});
      auto& w = cfg.walks;
      s.read_int("dimensions", w.dimensions);
      s.read_int("walks_per_node", w.walks_per_node);
      s.read_int("walk_length", w.walk_length);
      s.read_double("p", w.return_p);
      s.read_double("q", w.in_out_q);
      s.read_int("window", w.window);
      s.read_int("negatives", w.negatives_per_positive);
      s.read_int("epochs", w.epochs);
      s.read_double("learning_rate", w.learning_rate);
      s.read_int("threads", w.threads);
    } else if (name == "rfecv") {
      s.allow({"enabled", "folds"});
      s.read_bool("enabled", cfg.rfecv);
      s.read_int("folds", cfg.rfecv_folds);
    } else if (name == "lda") {
      s.allow({"sample_size"});
      s.read_int("sample_size", cfg.lda_sample_size);
    } else if (name == "presets") {
      for (const auto& [key, child] : tree) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) {
          throw ConfigError(fmt::format("[presets] key '{}' must be <dataset>.<model>", key));
        }
        const auto kind = as_config_error("[presets]", [&] {
          return parse_dataset_kind(key.substr(0, dot));
        });
        const auto model = parse_model_kind(key.substr(dot + 1));
        const std::string preset(detail::trim(child.data()));
        const auto chosen = model_preset(preset);
        if (chosen.kind != model) {
          throw ConfigError(fmt::format("[presets] {}: preset '{}' is a {} preset", key, preset,
                                        to_string(chosen.kind)));
        }
        cfg.presets[fmt::format("{}.{}", to_string(kind), to_string(model))] = preset;
      }
    } else if (name.rfind("network.", 0) == 0) {
      s.allow({"edges", "attributes", "role"});
      NetworkSpec net;
      net.label = name.substr(8);
      if (auto t = s.text("edges")) net.edges = resolve(*t);
      if (auto t = s.text("attributes")) net.attributes = resolve(*t);
      const auto role = s.text("role").value_or("seen");
      if (role == "seen") net.seen = true;
      else if (role == "unseen") net.seen = false;
      else throw ConfigError(fmt::format("[{}] role must be seen or unseen, got '{}'", name, role));
      cfg.networks.push_back(std::move(net));
    } else {
      throw ConfigError(fmt::format("unknown config section [{}]", name));
    }
  }
  return cfg;
}

void PipelineConfig::validate() const {
  if (networks.empty()) throw ConfigError("config lists no [network.<label>] sections");
  std::set<std::string> labels;
  std::size_t seen_count = 0;
  for (const auto& n : networks) {
    if (n.label.empty() || n.label.find_first_of(",/\\ \t") != std::string::npos) {
      throw ConfigError(fmt::format("network label '{}' must be non-empty without commas, "
                                    "slashes or spaces", n.label));
    }
    if (!labels.insert(n.label).second) {
      throw ConfigError(fmt::format("network '{}' is listed twice", n.label));
    }
    for (const auto& [what, p] : {std::pair{"edges", &n.edges}, {"attributes", &n.attributes}}) {
      if (p->empty()) throw ConfigError(fmt::format("[network.{}] lacks '{}'", n.label, what));
      if (!std::filesystem::exists(*p)) {
        throw ConfigError(fmt::format("[network.{}] {} file '{}' does not exist", n.label, what,
                                      p->string()));
      }
    }
    seen_count += n.seen;
  }
  if (seen_count == 0) throw ConfigError("at least one network must have role = seen");
  if (datasets.empty()) throw ConfigError("[pipeline] datasets is empty");
  if (models.empty()) throw ConfigError("[pipeline] models is empty");
  std::set<DatasetKind> unique_datasets(datasets.begin(), datasets.end());
  if (unique_datasets.size() != datasets.size()) {
    throw ConfigError("[pipeline] datasets has duplicates");
  }
  std::set<ModelKind> unique_models(models.begin(), models.end());
  if (unique_models.size() != models.size()) throw ConfigError("[pipeline] models has duplicates");
  if (!(positive_fraction > 0 && positive_fraction < 1)) {
    throw ConfigError("[split] positive_fraction must be in (0, 1)");
  }
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw ConfigError("[split] train_fraction must be in (0, 1)");
  }
  as_config_error("[node2vec]", [&] {
    walks.validate();
    return 0;
  });
  if (rfecv_folds < 2) throw ConfigError("[rfecv] folds must be >= 2");
  if (lda_sample_size < 2) throw ConfigError("[lda] sample_size must be >= 2");
}

std::string PipelineConfig::hash() const {
  std::string canon = fmt::format("seed={};threads={};", seed, threads);
  for (const auto& n : networks) {
    canon += fmt::format("net={}|{}|{}|{};", n.label, n.edges.string(), n.attributes.string(),
                         n.seen ? "seen" : "unseen");
  }
  for (auto d : datasets) canon += fmt::format("dataset={};", to_string(d));
  for (auto m : models) canon += fmt::format("model={};", to_string(m));
  for (const auto& [k, v] : presets) canon += fmt::format("preset={}={};", k, v);
  canon += fmt::format("split={},{};", detail::exact(positive_fraction),
                       detail::exact(train_fraction));
  const auto& w = walks;
  canon += fmt::format("walks={},{},{},{},{},{},{},{},{},{};", w.dimensions, w.walks_per_node,
                       w.walk_length, detail::exact(w.return_p), detail::exact(w.in_out_q),
                       w.window, w.negatives_per_positive, w.epochs,
                       detail::exact(w.learning_rate), w.threads);
  canon += fmt::format("rfecv={},{};lda={}", rfecv, rfecv_folds, lda_sample_size);
  return fmt::format("{:016x}", fnv1a64(canon));
}

const NetworkSpec* PipelineConfig::network(std::string_view label) const {
  for (const auto& n : networks) {
    if (n.label == label) return &n;
  }
  return nullptr;
}

std::string default_preset(DatasetKind dataset, ModelKind model) {
  switch (model) {
    case ModelKind::LogReg: return fmt::format("logreg-{}", to_string(dataset));
    case ModelKind::Svm:
      return dataset == DatasetKind::Embedding ? "svm-gaussian" : "svm-linear";
    case ModelKind::RandomForest: return "rf-default";
    case ModelKind::Mlp: return "mlp-default";
  }
  return {};
}

std::string preset_for(const PipelineConfig& cfg, DatasetKind dataset, ModelKind model) {
  const auto it = cfg.presets.find(fmt::format("{}.{}", to_string(dataset), to_string(model)));
  return it != cfg.presets.end() ? it->second : default_preset(dataset, model);
}

}  // namespace linkpred
