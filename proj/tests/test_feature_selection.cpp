#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "linkpred/errors.hpp"
#include "linkpred/feature_selection.hpp"
#include "linkpred/random.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace linkpred;
using namespace linkpred::testing;

bool noise_first(const SelectionReport& r) {
  // ranking lists the last eliminated first, so noise must fill the tail
  for (std::size_t i = 0; i < 3; ++i) {
    if (r.ranking[i].rfind("info", 0) != 0) return false;
  }
  return true;
}

TEST(Rfecv, NoiseColumnsEliminatedFirst) {
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = rfecv(planted_noise(300, seed), 5, seed);
    good += noise_first(r);
  }
  EXPECT_GE(good, 9);
}

TEST(Rfecv, ReportShape) {
  const auto x = planted_noise(200, 3);
  const auto r = rfecv(x, 4, 1);
  EXPECT_EQ(r.folds, 4u);
  EXPECT_EQ(r.ranking.size(), 6u);
  EXPECT_EQ(r.cv_scores.size(), 6u);
  EXPECT_EQ(std::set<std::string>(r.ranking.begin(), r.ranking.end()).size(), 6u);
  ASSERT_FALSE(r.selected.empty());
  // selected keeps input order and is the head of the ranking
  std::vector<std::string> head(r.ranking.begin(), r.ranking.begin() + r.selected.size());
  std::sort(head.begin(), head.end());
  auto sel = r.selected;
  std::sort(sel.begin(), sel.end());
  EXPECT_EQ(head, sel);
  std::vector<std::string> in_order;
  for (const auto& c : x.column_names()) {
    if (std::find(r.selected.begin(), r.selected.end(), c) != r.selected.end()) {
      in_order.push_back(c);
    }
  }
  EXPECT_EQ(r.selected, in_order);
  const double best = *std::max_element(r.cv_scores.begin(), r.cv_scores.end());
  EXPECT_NEAR(r.cv_scores[r.selected.size() - 1], best, 1e-12);
  for (std::size_t k = 0; k + 1 < r.selected.size(); ++k) EXPECT_LT(r.cv_scores[k], best - 1e-12);
}

TEST(Rfecv, IdenticalCopiesKeepOne) {
  Rng rng(4);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) {
    const int y = i % 2;
    const double v = normal(rng) + y;
    rows.push_back({v, v});
    labels.push_back(y);
  }
  const auto x = FeatureMatrix::from_rows({"a", "b"}, rows, labels);
  const auto r = rfecv(x, 5, 1);
  EXPECT_EQ(r.selected.size(), 1u);
  EXPECT_EQ(r.cv_scores[0], r.cv_scores[1]);
}

TEST(Rfecv, ColumnOrderDoesNotChangeSelection) {
  const auto x = planted_noise(300, 7);
  const std::vector<std::string> shuffled{"noise_b", "info_c", "noise_a", "info_a", "noise_c",
                                          "info_b"};
  const auto a = rfecv(x, 5, 2);
  const auto b = rfecv(x.select_columns(shuffled), 5, 2);
  EXPECT_EQ(std::set<std::string>(a.selected.begin(), a.selected.end()),
            std::set<std::string>(b.selected.begin(), b.selected.end()));
}

TEST(Rfecv, Validation) {
  const auto one = FeatureMatrix::from_rows({"a"}, {{1}, {2}, {3}, {4}}, {0, 1, 0, 1});
  EXPECT_THROW(rfecv(one, 2, 1), DomainError);
  const auto x = planted_noise(12, 1);
  EXPECT_THROW(rfecv(x, 10, 1), StratificationError);
}

TEST(StratifiedFolds, BalancedAndDeterministic) {
  std::vector<int> labels;
  for (int i = 0; i < 103; ++i) labels.push_back(i < 40 ? 1 : 0);
  const auto f = stratified_folds(labels, 5, 9);
  ASSERT_EQ(f.size(), labels.size());
  std::vector<int> pos(5, 0), total(5, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    ASSERT_LT(f[i], 5u);
    pos[f[i]] += labels[i];
    total[f[i]] += 1;
  }
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(pos[k], 8);
    EXPECT_GE(total[k], 20);
    EXPECT_LE(total[k], 21);
  }
  EXPECT_EQ(stratified_folds(labels, 5, 9), f);
  EXPECT_THROW(stratified_folds({1, 1, 0, 0, 0, 0}, 3, 1), StratificationError);
}

TEST(RfImportance, ColumnOrderAndSum) {
  const auto x = planted_noise(300, 2);
  ModelConfig cfg;
  cfg.trees = 50;
  const auto imp = rf_importance(x, cfg);
  ASSERT_EQ(imp.size(), 6u);
  double sum = 0;
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_EQ(imp[j].first, x.column_names()[j]);
    sum += imp[j].second;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_GT(imp[0].second, imp[3].second);
  TempDir dir;
  write_importance_csv(imp, dir / "imp.csv");
  const auto text = read_text(dir / "imp.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "feature,importance");
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(a.size());
  mb /= double(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(Correlation, MatchesDirectPearson) {
  const auto x = planted_noise(100, 5);
  const auto c = correlation_matrix(x);
  ASSERT_EQ(c.names.size(), 7u);
  EXPECT_EQ(c.names.back(), "label");
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < 6; ++j) cols.push_back(x.column(j));
  cols.emplace_back(x.labels().begin(), x.labels().end());
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR(c.at(i, i), 1.0, 1e-12);
    for (std::size_t j = 0; j < 7; ++j) {
      EXPECT_NEAR(c.at(i, j), pearson(cols[i], cols[j]), 1e-12);
      EXPECT_EQ(c.at(i, j), c.at(j, i));
    }
  }
  // positive semidefinite
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(7);
    for (double& e : v) e = normal(rng);
    double q = 0;
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) q += v[i] * c.at(i, j) * v[j];
    }
    EXPECT_GE(q, -1e-9);
  }
}

TEST(Correlation, LinearAndConstantColumns) {
  const auto x = FeatureMatrix::from_rows({"a", "neg", "flat"},
                                          {{1, -2, 4}, {2, -4, 4}, {3, -6, 4}, {5, -10, 4}},
                                          {0, 0, 1, 1});
  const auto c = correlation_matrix(x);
  EXPECT_NEAR(c.at(0, 1), -1.0, 1e-12);
  EXPECT_EQ(c.at(0, 2), 0.0);
  EXPECT_EQ(c.at(2, 2), 1.0);
  EXPECT_EQ(c.at(2, 3), 0.0);
  EXPECT_NEAR(c.at(0, 3), pearson({1, 2, 3, 5}, {0, 0, 1, 1}), 1e-12);
  const auto tiny = FeatureMatrix::from_rows({"a"}, {{1}}, {1});
  EXPECT_THROW(correlation_matrix(tiny), DomainError);
}

TEST(SelectionCsv, RoundTripSelectedColumns) {
  TempDir dir;
  SelectionReport r;
  r.ranking = {"c", "a", "b"};
  r.selected = {"a", "c"};
  r.cv_scores = {0.7, 0.8, 0.75};
  r.folds = 5;
  write_selection_csv(r, dir / "sel.csv");
  write_cv_scores_csv(r, dir / "cv.csv");
  EXPECT_EQ(read_selected_columns(dir / "sel.csv", {"a", "b", "c"}), r.selected);
  EXPECT_EQ(read_text(dir / "sel.csv").substr(0, 21), "rank,feature,selected");
  EXPECT_NE(read_text(dir / "cv.csv").find("2,0.8"), std::string::npos);
}

}  // namespace
