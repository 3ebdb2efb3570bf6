#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "linkpred/classifiers.hpp"
#include "linkpred/dataset.hpp"

namespace linkpred {

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Computed from average ranks in O(n log n).
double auroc(std::span<const double> scores, std::span<const int> labels);

struct F1Accuracy {
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// Rows with score >= threshold are predicted positive. F1 is 0 when
/// precision + recall is 0.
F1Accuracy f1_accuracy(std::span<const double> scores, std::span<const int> labels,
                       double threshold);

struct EvalReport {
  DatasetKind dataset = DatasetKind::Baseline;
  Partition partition = Partition::Test;
  ModelKind model = ModelKind::LogReg;
  double auroc = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// Scores `x` with `model` and summarises the three metrics.
EvalReport evaluate(const TrainedModel& model, const FeatureMatrix& x);

/// Results CSV `dataset,partition,model,auroc,f1,accuracy,n_pos,n_neg`.
void write_results_csv(std::span<const EvalReport> rows, const std::filesystem::path& path);
std::vector<EvalReport> read_results_csv(const std::filesystem::path& path);
std::string results_csv_row(const EvalReport& r);

struct LdaProbe {
  std::vector<double> direction;  // unit norm
  double threshold = 0.0;
  double train_accuracy = 0.0;
  /// true when the positive class projects above the threshold
  bool positive_above = true;
  std::vector<double> projected;
  std::vector<int> labels;
};

/// Two-class Fisher discriminant on `sample_size` rows drawn uniformly without
/// replacement. The within-class scatter gets a ridge of
/// 1e-6 * trace(S_w) / dims before solving.
LdaProbe lda_probe(const FeatureMatrix& x, std::size_t sample_size, std::uint64_t seed);

/// CSV `coord,label`, preceded by a `# threshold=<value>` comment line.
void write_lda_csv(const LdaProbe& probe, const std::filesystem::path& path);

}  // namespace linkpred
