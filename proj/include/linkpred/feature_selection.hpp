#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "linkpred/classifiers.hpp"
#include "linkpred/dataset.hpp"

namespace linkpred {

struct SelectionReport {
  /// All input columns; the last one eliminated comes first.
  std::vector<std::string> ranking;
  /// Retained columns, in input order.
  std::vector<std::string> selected;
  /// cv_scores[k - 1] is the mean fold AUROC of the surviving k-column subset.
  std::vector<double> cv_scores;
  std::size_t folds = 0;
};

/// Recursive feature elimination with a linear SVM, one column per round.
/// Each round fits on all rows, scores the current subset by stratified k-fold
/// AUROC, then drops the column with the smallest |primal weight|. The retained
/// subset maximises the mean score, ties going to fewer columns.
/// `svm` supplies C and the solver settings; its kernel is forced to linear.
SelectionReport rfecv(const FeatureMatrix& x, std::size_t folds, std::uint64_t seed,
                      const ModelConfig& svm = {}, std::size_t threads = 0);

/// Stratified fold index per row, or StratificationError when some fold would
/// lack a class.
std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t folds,
                                          std::uint64_t seed);

/// Forest impurity importances, one (column, importance) pair per column in
/// column order; the values sum to 1.
std::vector<std::pair<std::string, double>> rf_importance(const FeatureMatrix& x,
                                                          const ModelConfig& cfg);

struct CorrelationMatrix {
  std::vector<std::string> names;  // feature columns, then "label"
  std::vector<double> values;      // row-major, names.size() squared

  double at(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
};

/// Pearson correlations between all columns and the label. A zero-variance
/// column correlates 0 with everything else (1 with itself) and logs a warning.
CorrelationMatrix correlation_matrix(const FeatureMatrix& x);

/// `rank,feature,selected` in ranking order.
void write_selection_csv(const SelectionReport& report, const std::filesystem::path& path);
/// `n_features,mean_auroc`.
void write_cv_scores_csv(const SelectionReport& report, const std::filesystem::path& path);
/// Reads the `selected` column back from write_selection_csv output, in the
/// original column order of `columns`.
std::vector<std::string> read_selected_columns(const std::filesystem::path& path,
                                               const std::vector<std::string>& columns);
/// `feature,importance` sorted by importance, largest first.
void write_importance_csv(std::vector<std::pair<std::string, double>> importance,
                          const std::filesystem::path& path);
/// Square CSV with a leading name column.
void write_correlation_csv(const CorrelationMatrix& m, const std::filesystem::path& path);

}  // namespace linkpred
