#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linkpred/classifiers.hpp"
#include "linkpred/parallel.hpp"
#include "linkpred/random.hpp"
#include "model_common.hpp"

namespace linkpred {

double DecisionTree::predict(std::span<const double> x) const {
  std::size_t k = 0;
  while (nodes[k].feature >= 0) {
    k = static_cast<std::size_t>(x[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left
                                                                            : nodes[k].right);
  }
  return nodes[k].value;
}

namespace {

double gini(double positives, double total) {
  if (total <= 0) return 0.0;
  const double p = positives / total;
  return 2.0 * p * (1.0 - p);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double child_impurity = 0.0;  // weighted by child size
};

/// CART builder over one bootstrap sample. Gini criterion, sqrt(d) candidate
/// features per split.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const ModelConfig& cfg, std::uint64_t seed)
      : x_(x), cfg_(cfg), rng_(seed), importance_(x.cols(), 0.0) {
    mtry_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));
  }

  DecisionTree build(std::vector<std::size_t> sample) {
    total_ = static_cast<double>(sample.size());
    grow(sample, 0, sample.size(), 0);
    return std::move(tree_);
  }

  const std::vector<double>& importance() const { return importance_; }

 private:
  std::int32_t grow(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                    std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const double n = static_cast<double>(end - begin);
    double pos = 0;
    for (std::size_t i = begin; i < end; ++i) pos += x_.labels()[idx[i]];
    tree_.nodes[id].value = pos / n;

    const bool pure = pos == 0 || pos == n;
    const bool too_deep = cfg_.max_depth && depth >= *cfg_.max_depth;
    if (pure || too_deep || end - begin < 2 * cfg_.min_leaf) return id;

    const Split split = best_split(idx, begin, end);
    if (split.feature < 0) return id;

    const double parent = gini(pos, n);
    importance_[split.feature] += (n * parent - split.child_impurity) / total_;

    const auto mid = static_cast<std::size_t>(
        std::partition(idx.begin() + begin, idx.begin() + end,
                       [&](std::size_t r) { return x_.at(r, split.feature) <= split.threshold; }) -
        idx.begin());
    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    const auto left = grow(idx, begin, mid, depth + 1);
    const auto right = grow(idx, mid, end, depth + 1);
    tree_.nodes[id].left = left;
    tree_.nodes[id].right = right;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
    const std::size_t d = x_.cols();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);

    Split best;
    double best_score = std::numeric_limits<double>::infinity();
    std::size_t informative = 0;
    // visit features in random order until mtry non-constant ones were tried
    for (std::size_t f = 0; f < d && informative < mtry_; ++f) {
      std::swap(features[f], features[f + uniform_index(rng_, d - f)]);
      const std::size_t j = features[f];
      column_.clear();
      for (std::size_t i = begin; i < end; ++i) {
        column_.emplace_back(x_.at(idx[i], j), x_.labels()[idx[i]]);
      }
      std::sort(column_.begin(), column_.end());
      if (column_.front().first == column_.back().first) continue;
      ++informative;

      const double n = static_cast<double>(column_.size());
      double total_pos = 0;
      for (const auto& c : column_) total_pos += c.second;
      double left_pos = 0;
      for (std::size_t i = 1; i < column_.size(); ++i) {
        left_pos += column_[i - 1].second;
        if (column_[i - 1].first == column_[i].first) continue;
        if (i < cfg_.min_leaf || column_.size() - i < cfg_.min_leaf) continue;
        const double nl = static_cast<double>(i);
        const double nr = n - nl;
        const double score = nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr);
        if (score < best_score) {
          best_score = score;
          best.feature = static_cast<int>(j);
          double t = 0.5 * (column_[i - 1].first + column_[i].first);
          if (!(t < column_[i].first)) t = column_[i - 1].first;
          best.threshold = t;
          best.child_impurity = score;
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  const ModelConfig& cfg_;
  Rng rng_;
  std::size_t mtry_ = 1;
  double total_ = 0;
  DecisionTree tree_;
  std::vector<double> importance_;
  std::vector<std::pair<double, int>> column_;
};

}  // namespace

TrainedModel train_random_forest(const FeatureMatrix& x, const ModelConfig& cfg) {
  detail::require_trainable(x, "train_random_forest");
  if (cfg.trees < 1) throw DomainError("train_random_forest: trees must be >= 1");
  if (cfg.min_leaf < 1) throw DomainError("train_random_forest: min_leaf must be >= 1");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  ForestParams forest;
  forest.trees.resize(cfg.trees);
  std::vector<std::vector<double>> per_tree(cfg.trees);
  parallel_for(
      cfg.trees,
      [&](std::size_t t) {
        Rng boot(derive_seed(cfg.seed, t, 0x626f6f74ULL));
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = uniform_index(boot, n);
        TreeBuilder builder(x, cfg, derive_seed(cfg.seed, t, 0x73706c6974ULL));
        forest.trees[t] = builder.build(std::move(sample));
        per_tree[t] = builder.importance();
      },
      cfg.threads);

  forest.importances.assign(d, 0.0);
  for (auto& imp : per_tree) {
    const double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (sum <= 0) continue;
    for (std::size_t j = 0; j < d; ++j) forest.importances[j] += imp[j] / sum;
  }
  const double total = std::accumulate(forest.importances.begin(), forest.importances.end(), 0.0);
  if (total > 0) {
    for (double& v : forest.importances) v /= total;
  }
  return TrainedModel(ModelKind::RandomForest, cfg, x.column_names(), std::move(forest));
}

}  // namespace linkpred
