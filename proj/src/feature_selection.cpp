#include "linkpred/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "linkpred/errors.hpp"
#include "linkpred/evaluation.hpp"
#include "linkpred/parallel.hpp"
#include "linkpred/random.hpp"
#include "text_io.hpp"

namespace linkpred {

std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw DomainError("stratified_folds: need at least 2 folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DomainError(fmt::format("stratified_folds: label {} is not binary", labels[i]));
    }
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < folds) {
      throw StratificationError(fmt::format(
          "stratified_folds: class {} has {} rows, fewer than {} folds", c, by_class[c].size(),
          folds));
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> fold(labels.size());
  for (auto& members : by_class) {
    shuffle(members, rng);
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = k % folds;
  }
  return fold;
}

namespace {

/// Mean held-out AUROC of a linear SVM over the given folds.
double cv_auroc(const FeatureMatrix& x, const std::vector<std::size_t>& fold, std::size_t folds,
                const ModelConfig& svm, std::size_t threads) {
  std::vector<double> scores(folds);
  parallel_for(
      folds,
      [&](std::size_t k) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < x.rows(); ++i) {
          (fold[i] == k ? test_rows : train_rows).push_back(i);
        }
        const auto train = x.select_rows(train_rows);
        const auto test = x.select_rows(test_rows);
        const auto model = train_svm(train, svm);
        scores[k] = auroc(score(model, test), test.labels());
      },
      threads);
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(folds);
}

}  // namespace

SelectionReport rfecv(const FeatureMatrix& x, std::size_t folds, std::uint64_t seed,
                      const ModelConfig& svm, std::size_t threads) {
  if (x.cols() < 2) throw DomainError("rfecv: need at least 2 feature columns");
  ModelConfig cfg = svm;
  cfg.kernel = Kernel::Linear;
  const auto fold = stratified_folds(x.labels(), folds, seed);

  SelectionReport report;
  report.folds = folds;
  report.cv_scores.assign(x.cols(), 0.0);
  std::vector<std::string> current = x.column_names();
  std::vector<std::string> eliminated;
  std::vector<std::vector<std::string>> subsets(x.cols());
  while (!current.empty()) {
    const auto sub = x.select_columns(current);
    report.cv_scores[current.size() - 1] = cv_auroc(sub, fold, folds, cfg, threads);
    subsets[current.size() - 1] = current;
    if (current.size() == 1) {
      eliminated.push_back(current.front());
      break;
    }
    const auto model = train_svm(sub, cfg);
    const auto& w = model.as<SvmParams>().primal_weights;
    // smallest |w|; equal magnitudes fall back to the name so the result does
    // not depend on column order
    std::size_t drop = 0;
    for (std::size_t j = 1; j < current.size(); ++j) {
      const double a = std::abs(w[j]);
      const double b = std::abs(w[drop]);
      if (a < b || (a == b && current[j] < current[drop])) drop = j;
    }
    spdlog::debug("rfecv: {} columns, cv auroc {:.4f}, dropping {}", current.size(),
                  report.cv_scores[current.size() - 1], current[drop]);
    eliminated.push_back(current[drop]);
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  report.ranking.assign(eliminated.rbegin(), eliminated.rend());

  // scores closer than this are treated as ties and resolved toward fewer columns
  constexpr double kTieTolerance = 1e-12;
  const double best = *std::max_element(report.cv_scores.begin(), report.cv_scores.end());
  std::size_t k = 0;
  while (report.cv_scores[k] < best - kTieTolerance) ++k;
  for (const auto& name : x.column_names()) {
    if (std::find(subsets[k].begin(), subsets[k].end(), name) != subsets[k].end()) {
      report.selected.push_back(name);
    }
  }
  return report;
}

std::vector<std::pair<std::string, double>> rf_importance(const FeatureMatrix& x,
                                                          const ModelConfig& cfg) {
  const auto model = train_random_forest(x, cfg);
  const auto& imp = model.as<ForestParams>().importances;
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < x.cols(); ++j) out.emplace_back(x.column_names()[j], imp[j]);
  return out;
}

CorrelationMatrix correlation_matrix(const FeatureMatrix& x) {
  if (x.rows() < 2) throw DomainError("correlation_matrix: need at least 2 rows");
  const std::size_t d = x.cols() + 1;
  const std::size_t n = x.rows();
  CorrelationMatrix m;
  m.names = x.column_names();
  m.names.push_back("label");

  std::vector<std::vector<double>> cols(d);
  for (std::size_t j = 0; j + 1 < d; ++j) cols[j] = x.column(j);
  cols[d - 1].assign(x.labels().begin(), x.labels().end());
  std::vector<double> sd(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = std::accumulate(cols[j].begin(), cols[j].end(), 0.0) / n;
    double ss = 0.0;
    for (double& v : cols[j]) {
      v -= mean;
      ss += v * v;
    }
    sd[j] = std::sqrt(ss);
    if (sd[j] == 0) spdlog::warn("correlation_matrix: column '{}' is constant", m.names[j]);
  }
  m.values.assign(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    m.values[a * d + a] = 1.0;
    for (std::size_t b = a + 1; b < d; ++b) {
      double r = 0.0;
      if (sd[a] > 0 && sd[b] > 0) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += cols[a][i] * cols[b][i];
        r = std::clamp(s / (sd[a] * sd[b]), -1.0, 1.0);
      }
      m.values[a * d + b] = r;
      m.values[b * d + a] = r;
    }
  }
  return m;
}

void write_selection_csv(const SelectionReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "rank,feature,selected\n";
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    const auto& name = report.ranking[i];
    const bool kept =
        std::find(report.selected.begin(), report.selected.end(), name) != report.selected.end();
    out << i + 1 << ',' << name << ',' << (kept ? 1 : 0) << '\n';
  }
}

void write_cv_scores_csv(const SelectionReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "n_features,mean_auroc\n";
  for (std::size_t k = 0; k < report.cv_scores.size(); ++k) {
    out << k + 1 << ',' << detail::exact(report.cv_scores[k]) << '\n';
  }
}

std::vector<std::string> read_selected_columns(const std::filesystem::path& path,
                                               const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw DependencyError(fmt::format("missing selection file '{}'", path.string()));
  const std::string file = path.string();
  std::string line;
  std::getline(in, line);
  std::vector<std::string> kept;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(detail::trim(line), ',');
    if (f.size() != 3) throw ParseError(file, line_no, "expected rank,feature,selected");
    if (f[2] == "1") kept.emplace_back(f[1]);
  }
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (std::find(kept.begin(), kept.end(), c) != kept.end()) out.push_back(c);
  }
  if (out.size() != kept.size()) {
    throw SchemaError(fmt::format("{}: selected columns are not all present in the dataset", file));
  }
  return out;
}

void write_importance_csv(std::vector<std::pair<std::string, double>> importance,
                          const std::filesystem::path& path) {
  std::stable_sort(importance.begin(), importance.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "feature,importance\n";
  for (const auto& [name, value] : importance) out << name << ',' << detail::exact(value) << '\n';
}

void write_correlation_csv(const CorrelationMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "feature";
  for (const auto& name : m.names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out << m.names[i];
    for (std::size_t j = 0; j < m.names.size(); ++j) out << ',' << detail::exact(m.at(i, j));
    out << '\n';
  }
}

}  // namespace linkpred
