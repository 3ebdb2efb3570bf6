#include <array>
#include <cmath>
#include <fstream>
#include <map>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/common.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "linkpred/classifiers.hpp"
#include "linkpred/errors.hpp"
#include "model_common.hpp"

namespace linkpred {

namespace {

template <class E, std::size_t N>
E parse_enum(std::string_view text, const std::array<std::pair<std::string_view, E>, N>& table,
             std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  std::vector<std::string_view> names;
  for (const auto& entry : table) names.push_back(entry.first);
  throw ConfigError(fmt::format("unknown {} '{}' (expected one of {})", what, text,
                                fmt::join(names, ", ")));
}

constexpr std::array<std::pair<std::string_view, ModelKind>, 4> kModelKinds{{
    {"logreg", ModelKind::LogReg},
    {"random_forest", ModelKind::RandomForest},
    {"svm", ModelKind::Svm},
    {"mlp", ModelKind::Mlp},
}};
constexpr std::array<std::pair<std::string_view, Penalty>, 2> kPenalties{{
    {"l1", Penalty::L1},
    {"l2", Penalty::L2},
}};
constexpr std::array<std::pair<std::string_view, Kernel>, 3> kKernels{{
    {"linear", Kernel::Linear},
    {"gaussian", Kernel::Gaussian},
    {"polynomial", Kernel::Polynomial},
}};

template <class E, std::size_t N>
std::string_view enum_name(E value, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

}  // namespace

std::string_view to_string(ModelKind kind) { return enum_name(kind, kModelKinds); }
std::string_view to_string(Penalty penalty) { return enum_name(penalty, kPenalties); }
std::string_view to_string(Kernel kernel) { return enum_name(kernel, kKernels); }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "rf") return ModelKind::RandomForest;
  return parse_enum(text, kModelKinds, "model kind");
}
Penalty parse_penalty(std::string_view text) { return parse_enum(text, kPenalties, "penalty"); }
Kernel parse_kernel(std::string_view text) { return parse_enum(text, kKernels, "kernel"); }

TrainedModel train_model(ModelKind kind, const FeatureMatrix& x, const ModelConfig& cfg) {
  switch (kind) {
    case ModelKind::LogReg: return train_logreg(x, cfg);
    case ModelKind::RandomForest: return train_random_forest(x, cfg);
    case ModelKind::Svm: return train_svm(x, cfg);
    case ModelKind::Mlp: return train_mlp(x, cfg);
  }
  throw DomainError("train_model: unknown model kind");
}

namespace {

void check_columns(const TrainedModel& model, const FeatureMatrix& x) {
  const auto& want = model.feature_columns();
  const auto& got = x.column_names();
  if (want == got) return;
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < std::max(want.size(), got.size()); ++i) {
    const std::string w = i < want.size() ? want[i] : "<none>";
    const std::string g = i < got.size() ? got[i] : "<none>";
    if (w != g) issues.push_back(fmt::format("position {}: expected '{}', got '{}'", i, w, g));
  }
  throw SchemaError(fmt::format("score: feature columns do not match the model ({})",
                                fmt::join(issues, "; ")));
}

struct Scorer {
  std::span<const double> row;

  double operator()(const LogRegParams& p) const {
    double z = p.bias;
    for (std::size_t j = 0; j < row.size(); ++j) z += p.weights[j] * row[j];
    return detail::sigmoid(z);
  }
  double operator()(const ForestParams& p) const {
    double s = 0.0;
    for (const auto& tree : p.trees) s += tree.predict(row);
    return s / static_cast<double>(p.trees.size());
  }
  double operator()(const SvmParams& p) const {
    double s = p.bias;
    if (p.kernel == Kernel::Linear && p.primal_weights.size() == row.size()) {
      for (std::size_t j = 0; j < row.size(); ++j) s += p.primal_weights[j] * row[j];
      return s;
    }
    for (std::size_t k = 0; k < p.coef.size(); ++k) {
      s += p.coef[k] * kernel_value(p, {p.support.data() + k * p.dims, p.dims}, row);
    }
    return s;
  }
  double operator()(const MlpParams& p) const { return mlp_forward(p, row); }
};

}  // namespace

std::vector<double> score(const TrainedModel& model, const FeatureMatrix& x) {
  if (x.empty()) return {};
  check_columns(model, x);
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out[i] = std::visit(Scorer{x.row(i)}, model.params());
    if (!std::isfinite(out[i])) {
      throw NumericError(fmt::format("score: non-finite score for row {}", i));
    }
  }
  return out;
}

std::vector<int> predict(const TrainedModel& model, const FeatureMatrix& x) {
  const auto s = score(model, x);
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= model.threshold() ? 1 : 0;
  return out;
}

namespace {

std::map<std::string, ModelPreset, std::less<>> build_presets() {
  std::map<std::string, ModelPreset, std::less<>> out;

  // logistic regression steps are clamped to 1/L, so a large rate means "use 1/L"
  ModelConfig logreg;
  logreg.learning_rate = 1.0;
  logreg.epochs = 2000;
  logreg.penalty = Penalty::L2;
  logreg.penalty_weight = 1.0;
  out["logreg-baseline"] = {ModelKind::LogReg, logreg};
  logreg.penalty = Penalty::L1;
  logreg.penalty_weight = 1000.0;
  out["logreg-topological"] = {ModelKind::LogReg, logreg};
  logreg.penalty_weight = 150.0;
  out["logreg-embedding"] = {ModelKind::LogReg, logreg};

  ModelConfig svm;
  svm.kernel = Kernel::Linear;
  out["svm-linear"] = {ModelKind::Svm, svm};
  svm.kernel = Kernel::Gaussian;
  out["svm-gaussian"] = {ModelKind::Svm, svm};

  out["rf-default"] = {ModelKind::RandomForest, ModelConfig{}};
  out["mlp-default"] = {ModelKind::Mlp, ModelConfig{}};
  return out;
}

const std::map<std::string, ModelPreset, std::less<>>& presets() {
  static const auto table = build_presets();
  return table;
}

}  // namespace

ModelPreset model_preset(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    throw ConfigError(fmt::format("unknown model preset '{}' (expected one of {})", name,
                                  fmt::join(model_preset_names(), ", ")));
  }
  return it->second;
}

std::vector<std::string> model_preset_names() {
  std::vector<std::string> names;
  for (const auto& entry : presets()) names.push_back(entry.first);
  return names;
}

// cereal hooks

template <class A>
void serialize(A& ar, ModelConfig& c) {
  ar(c.penalty, c.penalty_weight, c.kernel, c.kernel_gamma, c.svm_c, c.poly_degree, c.poly_coef0,
     c.tolerance, c.max_iterations, c.trees, c.max_depth, c.min_leaf, c.hidden_layers,
     c.batch_size, c.seed, c.learning_rate, c.epochs, c.threads);
}

template <class A>
void serialize(A& ar, LogRegParams& p) {
  ar(p.weights, p.bias);
}

template <class A>
void serialize(A& ar, TreeNode& n) {
  ar(n.feature, n.threshold, n.left, n.right, n.value);
}

template <class A>
void serialize(A& ar, DecisionTree& t) {
  ar(t.nodes);
}

template <class A>
void serialize(A& ar, ForestParams& p) {
  ar(p.trees, p.importances);
}

template <class A>
void serialize(A& ar, SvmParams& p) {
  ar(p.kernel, p.gamma, p.coef0, p.degree, p.dims, p.support, p.coef, p.bias, p.primal_weights,
     p.dual_objective, p.alpha);
}

template <class A>
void serialize(A& ar, DenseLayer& l) {
  ar(l.inputs, l.outputs, l.weights, l.bias);
}

template <class A>
void serialize(A& ar, MlpParams& p) {
  ar(p.layers);
}

namespace {

constexpr std::array<char, 8> kModelMagic{'L', 'P', 'M', 'O', 'D', 'E', 'L', '\0'};

template <class P>
TrainedModel read_params(cereal::PortableBinaryInputArchive& ar, ModelKind kind, ModelConfig cfg,
                         std::vector<std::string> columns) {
  P p;
  ar(p);
  return TrainedModel(kind, std::move(cfg), std::move(columns), std::move(p));
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write model file {}", path.string()));
  out.write(kModelMagic.data(), kModelMagic.size());
  {
    cereal::PortableBinaryOutputArchive ar(out);
    ModelConfig cfg = model.config();
    std::vector<std::string> columns = model.feature_columns();
    ar(kModelFormatVersion, model.kind(), cfg, columns);
    std::visit([&](const auto& p) { ar(p); }, model.params());
  }
  if (!out) throw DataError(fmt::format("failed writing model file {}", path.string()));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError(fmt::format("missing model file {}", path.string()));
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kModelMagic) {
    throw FormatError(fmt::format("{}: not a linkpred model file", path.string()));
  }
  try {
    cereal::PortableBinaryInputArchive ar(in);
    std::uint32_t version = 0;
    ar(version);
    if (version != kModelFormatVersion) {
      throw FormatError(fmt::format("{}: model format version {} (this build reads {})",
                                    path.string(), version, kModelFormatVersion));
    }
    ModelKind kind{};
    ModelConfig cfg;
    std::vector<std::string> columns;
    ar(kind, cfg, columns);
    switch (kind) {
      case ModelKind::LogReg: return read_params<LogRegParams>(ar, kind, cfg, columns);
      case ModelKind::RandomForest: return read_params<ForestParams>(ar, kind, cfg, columns);
      case ModelKind::Svm: return read_params<SvmParams>(ar, kind, cfg, columns);
      case ModelKind::Mlp: return read_params<MlpParams>(ar, kind, cfg, columns);
    }
    throw FormatError(fmt::format("{}: unknown model kind", path.string()));
  } catch (const cereal::Exception& e) {
    throw FormatError(fmt::format("{}: truncated or corrupt model file ({})", path.string(),
                                  e.what()));
  }
}

}  // namespace linkpred
