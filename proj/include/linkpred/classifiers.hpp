#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "linkpred/dataset.hpp"

namespace linkpred {

enum class ModelKind { LogReg, RandomForest, Svm, Mlp };
enum class Penalty { L1, L2 };
enum class Kernel { Linear, Gaussian, Polynomial };

std::string_view to_string(ModelKind kind);
std::string_view to_string(Penalty penalty);
std::string_view to_string(Kernel kernel);
ModelKind parse_model_kind(std::string_view text);
Penalty parse_penalty(std::string_view text);
Kernel parse_kernel(std::string_view text);

/// Hyperparameters shared by all model families; each trainer reads the
/// fields that concern it.
struct ModelConfig {
  // logistic regression
  Penalty penalty = Penalty::L2;
  /// lambda in  mean BCE + lambda * R(w);  R = ||w||_1 or ||w||^2 / 2.
  double penalty_weight = 1.0;

  // SVM
  Kernel kernel = Kernel::Linear;
  std::optional<double> kernel_gamma;  // empty = 1 / (n_features * feature variance)
  double svm_c = 1.0;
  int poly_degree = 3;
  double poly_coef0 = 1.0;
  double tolerance = 1e-3;
  std::size_t max_iterations = 0;  // 0 = max(10^7, 100 n)

  // random forest
  std::size_t trees = 100;
  std::optional<std::size_t> max_depth;
  std::size_t min_leaf = 1;

  // MLP
  std::vector<std::size_t> hidden_layers{16, 8};
  std::size_t batch_size = 32;

  // shared optimisation settings
  std::uint64_t seed = 1;
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t threads = 0;  // forest only; 0 = hardware

  bool operator==(const ModelConfig&) const = default;
};

struct LogRegParams {
  std::vector<double> weights;
  double bias = 0.0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // positive-class fraction at the node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  double predict(std::span<const double> x) const;
};

struct ForestParams {
  std::vector<DecisionTree> trees;
  /// Mean impurity decrease per feature, normalised to sum 1.
  std::vector<double> importances;
};

struct SvmParams {
  Kernel kernel = Kernel::Linear;
  double gamma = 1.0;
  double coef0 = 1.0;
  int degree = 3;
  std::size_t dims = 0;
  std::vector<double> support;  // row-major support vectors
  std::vector<double> coef;     // alpha_i * y_i
  double bias = 0.0;
  std::vector<double> primal_weights;  // linear kernel only
  double dual_objective = 0.0;
  std::vector<double> alpha;  // full dual solution, training-row order
};

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;
};

struct MlpParams {
  std::vector<DenseLayer> layers;  // ReLU between layers, sigmoid output
};

class TrainedModel {
 public:
  using Params = std::variant<LogRegParams, ForestParams, SvmParams, MlpParams>;

  TrainedModel() = default;
  TrainedModel(ModelKind kind, ModelConfig config, std::vector<std::string> feature_columns,
               Params params)
      : kind_(kind),
        config_(std::move(config)),
        feature_columns_(std::move(feature_columns)),
        params_(std::move(params)) {}

  ModelKind kind() const noexcept { return kind_; }
  const ModelConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& feature_columns() const noexcept { return feature_columns_; }
  const Params& params() const noexcept { return params_; }

  template <class P>
  const P& as() const {
    return std::get<P>(params_);
  }

  /// 0.5 for probabilistic models, 0 for the SVM margin.
  double threshold() const noexcept { return kind_ == ModelKind::Svm ? 0.0 : 0.5; }

 private:
  ModelKind kind_ = ModelKind::LogReg;
  ModelConfig config_;
  std::vector<std::string> feature_columns_;
  Params params_;
};

/// Per-epoch full-batch training loss, recorded when requested.
struct TrainingLog {
  std::vector<double> loss;
};

TrainedModel train_logreg(const FeatureMatrix& x, const ModelConfig& cfg,
                          TrainingLog* log = nullptr);
TrainedModel train_random_forest(const FeatureMatrix& x, const ModelConfig& cfg);
TrainedModel train_svm(const FeatureMatrix& x, const ModelConfig& cfg);
TrainedModel train_mlp(const FeatureMatrix& x, const ModelConfig& cfg, TrainingLog* log = nullptr);
TrainedModel train_model(ModelKind kind, const FeatureMatrix& x, const ModelConfig& cfg);

/// One score per row. Columns of x must equal model.feature_columns() exactly,
/// in order; otherwise SchemaError names the offending columns.
std::vector<double> score(const TrainedModel& model, const FeatureMatrix& x);
std::vector<int> predict(const TrainedModel& model, const FeatureMatrix& x);

// Objective pieces exposed for gradient checking.

struct LogRegGradient {
  double loss = 0.0;
  std::vector<double> weights;
  double bias = 0.0;
};
/// Mean binary cross-entropy plus (lambda / 2)||w||^2 (smooth part only).
LogRegGradient logreg_loss_and_gradient(const FeatureMatrix& x, std::span<const double> weights,
                                        double bias, double l2_weight);

/// Mean binary cross-entropy of the network over the given rows, and its
/// gradient with the same layout as the parameters.
std::pair<double, MlpParams> mlp_loss_and_gradient(const MlpParams& params, const FeatureMatrix& x,
                                                   std::span<const std::size_t> rows);
double mlp_forward(const MlpParams& params, std::span<const double> input);
/// Glorot-uniform weights, zero biases.
MlpParams mlp_init(std::size_t inputs, std::span<const std::size_t> hidden, std::uint64_t seed);

/// SVM kernel value for the given parameters.
double kernel_value(const SvmParams& p, std::span<const double> a, std::span<const double> b);

/// Named presets: logreg-baseline, logreg-topological, logreg-embedding,
/// svm-linear, svm-gaussian, rf-default, mlp-default.
struct ModelPreset {
  ModelKind kind;
  ModelConfig config;
};
ModelPreset model_preset(std::string_view name);
std::vector<std::string> model_preset_names();

/// Self-describing binary file: magic, format version, kind, hyperparameters,
/// feature columns, parameters. Loading rejects other versions with FormatError.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

inline constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace linkpred
