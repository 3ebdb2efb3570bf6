#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "linkpred/errors.hpp"
#include "linkpred/evaluation.hpp"
#include "linkpred/random.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace linkpred;
using namespace linkpred::testing;

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_EQ(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(auroc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{0, 0, 1, 1}), 0.0);
  EXPECT_EQ(auroc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0, 1}), 0.5);
}

TEST(Auroc, RejectsDegenerateInput) {
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DomainError);
  EXPECT_THROW(auroc(std::vector<double>{0.1}, std::vector<int>{1, 0}), DomainError);
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 2}), DomainError);
}

TEST(Auroc, MatchesPairCounting) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    // coarse scores so that ties are common
    const std::uint64_t levels = 1 + uniform_index(rng, 20);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = double(uniform_index(rng, levels)) / 7.0;
      y[i] = static_cast<int>(uniform_index(rng, 2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(auroc(s, y), auroc_pairs(s, y), 1e-12) << "trial " << trial;
  }
}

TEST(Auroc, InvariantUnderMonotoneMaps) {
  Rng rng(2);
  std::vector<double> s(300);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < s.size(); ++i) {
    y[i] = static_cast<int>(i % 2);
    s[i] = normal(rng) + y[i];
  }
  const double base = auroc(s, y);
  std::vector<double> mapped(s.size()), negated(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    mapped[i] = std::exp(3 * s[i]) + 7;
    negated[i] = -s[i];
  }
  EXPECT_EQ(auroc(mapped, y), base);
  EXPECT_NEAR(auroc(negated, y) + base, 1.0, 1e-12);
}

TEST(F1Accuracy, Examples) {
  // tp 1, fp 1, fn 0, tn 0 at threshold 0.5
  const auto a = f1_accuracy(std::vector<double>{0.6, 0.7}, std::vector<int>{0, 1}, 0.5);
  EXPECT_NEAR(a.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(a.accuracy, 0.5);
  const auto none = f1_accuracy(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 1}, 0.5);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(none.accuracy, 0.5);
  // a score equal to the threshold counts as positive
  const auto edge = f1_accuracy(std::vector<double>{0.0, -1.0}, std::vector<int>{1, 0}, 0.0);
  EXPECT_EQ(edge.f1, 1.0);
  EXPECT_EQ(edge.accuracy, 1.0);
}

TEST(Evaluate, ReportsCountsAndMetrics) {
  const auto x = FeatureMatrix::from_rows({"a"}, {{-2}, {-1}, {1}, {2}, {3}}, {0, 0, 1, 1, 1},
                                          DatasetKind::Topological, Partition::Unseen);
  LogRegParams p;
  p.weights = {1.0};
  const TrainedModel m(ModelKind::LogReg, {}, {"a"}, p);
  const auto r = evaluate(m, x);
  EXPECT_EQ(r.dataset, DatasetKind::Topological);
  EXPECT_EQ(r.partition, Partition::Unseen);
  EXPECT_EQ(r.n_pos, 3u);
  EXPECT_EQ(r.n_neg, 2u);
  EXPECT_EQ(r.auroc, 1.0);
  EXPECT_EQ(r.f1, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(ResultsCsv, RoundTrip) {
  TempDir dir;
  std::vector<EvalReport> rows{
      {DatasetKind::Baseline, Partition::Test, ModelKind::Svm, 0.9123456789, 1.0 / 3, 0.5, 10, 12},
      {DatasetKind::Embedding, Partition::Unseen, ModelKind::Mlp, 0.5, 0.0, 0.25, 4, 4}};
  write_results_csv(rows, dir / "r.csv");
  const auto text = read_text(dir / "r.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "dataset,partition,model,auroc,f1,accuracy,n_pos,n_neg");
  const auto back = read_results_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].auroc, rows[0].auroc);
  EXPECT_EQ(back[0].f1, rows[0].f1);
  EXPECT_EQ(back[1].model, ModelKind::Mlp);
  EXPECT_EQ(back[1].partition, Partition::Unseen);
  EXPECT_EQ(back[1].n_neg, 4u);
}

FeatureMatrix gaussian_classes(std::size_t n, double separation, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    rows.push_back({normal(rng) + (y ? separation : 0.0), normal(rng) + (y ? separation : 0.0),
                    normal(rng)});
    labels.push_back(y);
  }
  return FeatureMatrix::from_rows({"a", "b", "c"}, rows, labels);
}

TEST(LdaProbe, SeparableClasses) {
  const auto x = gaussian_classes(400, 20.0, 4);
  const auto probe = lda_probe(x, 200, 1);
  EXPECT_EQ(probe.train_accuracy, 1.0);
  ASSERT_EQ(probe.direction.size(), 3u);
  double norm = 0;
  for (double v : probe.direction) norm += v * v;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(probe.projected.size(), 200u);
  EXPECT_EQ(probe.labels.size(), 200u);
  // the informative plane is spanned by (1, 1, 0)
  const double cos = std::abs(probe.direction[0] + probe.direction[1]) / std::sqrt(2.0);
  EXPECT_GE(cos, 0.99);
}

TEST(LdaProbe, IndistinguishableClasses) {
  const auto x = gaussian_classes(2000, 0.0, 5);
  const auto probe = lda_probe(x, 1000, 2);
  EXPECT_NEAR(probe.train_accuracy, 0.5, 0.1);
}

TEST(LdaProbe, DeterministicAndValidated) {
  const auto x = gaussian_classes(100, 1.0, 6);
  const auto a = lda_probe(x, 50, 3);
  const auto b = lda_probe(x, 50, 3);
  EXPECT_EQ(a.direction, b.direction);
  EXPECT_EQ(a.projected, b.projected);
  EXPECT_THROW(lda_probe(x, 101, 3), DomainError);
  EXPECT_THROW(lda_probe(x, 1, 3), DomainError);
  TempDir dir;
  write_lda_csv(a, dir / "lda.csv");
  const auto text = read_text(dir / "lda.csv");
  EXPECT_EQ(text.rfind("# threshold=", 0), 0u);
  EXPECT_NE(text.find("coord,label"), std::string::npos);
}

}  // namespace
