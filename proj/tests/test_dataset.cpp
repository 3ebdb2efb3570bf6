#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "linkpred/errors.hpp"
#include "linkpred/generators.hpp"
#include "linkpred/dataset.hpp"
#include "test_support.hpp"

namespace {

using namespace linkpred;
using namespace linkpred::testing;

SplitSpec spec_with_seed(std::uint64_t seed, double fraction = 0.02) {
  SplitSpec s;
  s.positive_fraction = fraction;
  s.seed = seed;
  return s;
}

AttributedGraph fixture_graph() {
  const auto g = powerlaw_cluster(400, 4, 0.7, 12, "fixture");
  return with_attributes(g, synthetic_attributes(g.node_count(), 3));
}

TEST(Split, DenseGraphCannotYieldNegatives) {
  const auto k4 = complete_graph(4);
  EXPECT_THROW(split_network(k4, spec_with_seed(1, 0.5)), SamplingError);
}

TEST(Split, TooFewEdgesForFraction) {
  EXPECT_THROW(split_network(complete_graph(4), spec_with_seed(1)), DomainError);
}

TEST(Split, HundredEdgePath) {
  const auto g = path_graph(101);
  ASSERT_EQ(g.edge_count(), 100u);
  const auto r = split_network(g, spec_with_seed(4));
  EXPECT_EQ(r.positives.size(), 2u);
  EXPECT_EQ(r.negatives.size(), 2u);
  EXPECT_EQ(r.train_graph.edge_count(), 98u);
  EXPECT_EQ(r.train_graph.node_count(), 101u);
}

TEST(Split, NoLeakageAcrossSeeds) {
  const auto g = fixture_graph();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = split_network(g, spec_with_seed(seed, 0.05));
    ASSERT_EQ(r.positives.size(), r.negatives.size());
    EXPECT_EQ(r.positives.size(),
              static_cast<std::size_t>(std::llround(0.05 * double(g.edge_count()))));
    EXPECT_EQ(r.train_graph.edge_count(), g.edge_count() - r.positives.size());
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& s : r.positives) {
      EXPECT_EQ(s.label, 1);
      EXPECT_LT(s.u, s.v);
      EXPECT_TRUE(g.has_edge(s.u, s.v));
      EXPECT_FALSE(r.train_graph.has_edge(s.u, s.v));
      EXPECT_TRUE(pairs.insert({s.u, s.v}).second);
    }
    for (const auto& s : r.negatives) {
      EXPECT_EQ(s.label, 0);
      EXPECT_LT(s.u, s.v);
      EXPECT_FALSE(g.has_edge(s.u, s.v));
      EXPECT_TRUE(pairs.insert({s.u, s.v}).second);
    }
    for (const Edge& e : r.train_graph.edges()) EXPECT_TRUE(g.has_edge(e.u, e.v));
  }
}

TEST(Split, SameSeedSameSplit) {
  const auto g = fixture_graph();
  const auto a = split_network(g, spec_with_seed(8));
  const auto b = split_network(g, spec_with_seed(8));
  EXPECT_EQ(a.positives, b.positives);
  EXPECT_EQ(a.negatives, b.negatives);
  EXPECT_EQ(a.train_graph.edges(), b.train_graph.edges());
  const auto c = split_network(g, spec_with_seed(9));
  EXPECT_NE(a.positives, c.positives);
}

TEST(Split, InvalidSpec) {
  const auto g = fixture_graph();
  EXPECT_THROW(split_network(g, spec_with_seed(1, 0.0)), DomainError);
  EXPECT_THROW(split_network(g, spec_with_seed(1, 1.0)), DomainError);
  auto s = spec_with_seed(1);
  s.seen_networks = {"a"};
  s.unseen_networks = {"a"};
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(TrainTestSplit, StratifiedAndDeterministic) {
  std::vector<NodePairSample> samples;
  for (NodeId i = 0; i < 50; ++i) samples.push_back({"n", i, i + 100, 1});
  for (NodeId i = 0; i < 50; ++i) samples.push_back({"n", i, i + 200, 0});
  const auto [train, test] = train_test_split(samples, 0.8, 3);
  EXPECT_EQ(train.size(), 80u);
  EXPECT_EQ(test.size(), 20u);
  std::size_t pos = 0;
  for (const auto& s : train) pos += s.label;
  EXPECT_EQ(pos, 40u);
  const auto again = train_test_split(samples, 0.8, 3);
  EXPECT_EQ(again.first, train);
  EXPECT_EQ(again.second, test);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto* part : {&train, &test}) {
    for (const auto& s : *part) EXPECT_TRUE(seen.insert({s.u, s.v}).second);
  }
  EXPECT_THROW(train_test_split(samples, 1.0, 3), DomainError);
}

AttributedGraph attributed_pair(AttributeRecord a, AttributeRecord b, AttributeRecord c = {}) {
  std::vector<Edge> edges{{0, 1}};
  return AttributedGraph::from_edges(3, edges, {a, b, c});
}

TEST(PairFeatures, YearDifference) {
  AttributeRecord a, b, c;
  a.year = 2008;
  b.year = 2005;
  const auto g = attributed_pair(a, b, c);
  EXPECT_EQ(node_pair_features(g, 0, 1, 2006.5).year_diff, 3.0);
  EXPECT_EQ(node_pair_features(g, 0, 1, 2006.5).same_year, 0.0);
  EXPECT_EQ(node_pair_features(g, 0, 2, 2007.5).year_diff, 0.5);
  EXPECT_EQ(node_pair_features(g, 0, 2, 2007.5).same_year, 0.0);
  EXPECT_DOUBLE_EQ(known_year_mean(g), 2006.5);
}

TEST(PairFeatures, MissingCodesNeverMatch) {
  AttributeRecord a, b;
  a.dorm = 0;
  b.dorm = 0;
  a.gender = 2;
  b.gender = 2;
  a.status = 1;
  b.status = 0;
  a.high_school = 900;
  b.high_school = 12;
  a.major = 5;
  b.major = 7;
  a.year = 2007;
  b.year = 2007;
  const auto f = node_pair_features(attributed_pair(a, b), 0, 1, 0.0);
  EXPECT_EQ(f.same_dorm, 0.0);
  EXPECT_EQ(f.same_gender, 1.0);
  EXPECT_EQ(f.same_faculty, 0.0);
  EXPECT_EQ(f.same_year, 1.0);
  EXPECT_EQ(f.high_school_1, 12.0);
  EXPECT_EQ(f.high_school_2, 900.0);
  EXPECT_EQ(f.major_1, 5.0);
  EXPECT_EQ(f.major_2, 7.0);
}

TEST(PairFeatures, SymmetricUnderSwap) {
  const auto g = fixture_graph();
  const double mean = known_year_mean(g);
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto u = static_cast<NodeId>(uniform_index(rng, g.node_count()));
    const auto v = static_cast<NodeId>(uniform_index(rng, g.node_count()));
    EXPECT_EQ(node_pair_features(g, u, v, mean), node_pair_features(g, v, u, mean));
  }
}

TEST(BuildDataset, ColumnCounts) {
  const auto g = fixture_graph();
  const auto r = split_network(g, spec_with_seed(1));
  std::vector<NodePairSample> samples = r.positives;
  samples.insert(samples.end(), r.negatives.begin(), r.negatives.end());
  const auto base = build_dataset(DatasetKind::Baseline, samples, r.train_graph, nullptr,
                                  Partition::Train);
  EXPECT_EQ(base.cols(), 4u);
  EXPECT_EQ(base.rows(), samples.size());
  EXPECT_EQ(base.column_names(), topology_feature_names());
  const auto topo = build_dataset(DatasetKind::Topological, samples, r.train_graph, nullptr,
                                  Partition::Train);
  EXPECT_EQ(topo.cols(), 13u);
  EmbeddingTable table(g.node_count(), 64);
  const auto emb = build_dataset(DatasetKind::Embedding, samples, r.train_graph, &table,
                                 Partition::Test);
  EXPECT_EQ(emb.cols(), 66u);
  EXPECT_EQ(emb.column_names()[0], "same_year");
  EXPECT_EQ(emb.column_names()[2], "emb_0");
  EXPECT_EQ(emb.partition(), Partition::Test);
  EXPECT_EQ(base.count_label(1), r.positives.size());
}

TEST(BuildDataset, TopologyComputedOnTrainGraph) {
  // holding out 0-1 leaves 0 and 1 with one common neighbour in a triangle
  const auto g = graph_of(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto train = g.without_edges(std::vector<Edge>{{0, 1}});
  const std::vector<NodePairSample> samples{{"", 0, 1, 1}};
  const auto m = build_dataset(DatasetKind::Baseline, samples, train, nullptr, Partition::Train);
  EXPECT_EQ(m.at(0, m.column_index("pa")), 1.0);
  EXPECT_EQ(m.at(0, m.column_index("jc")), 1.0);
}

TEST(Standardize, ExampleAndConstantColumn) {
  const auto m = FeatureMatrix::from_rows({"a", "c"}, {{1, 5}, {2, 5}, {3, 5}}, {0, 1, 0});
  const auto s = standardize(m, {});
  EXPECT_NEAR(s.train.at(0, 0), -1.224744871391589, 1e-12);
  EXPECT_NEAR(s.train.at(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(s.train.at(2, 0), 1.224744871391589, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.train.at(i, 1), 0.0);
  EXPECT_EQ(s.train.labels(), m.labels());
}

TEST(Standardize, OthersUseTrainParameters) {
  const auto train = FeatureMatrix::from_rows({"a"}, {{0}, {2}}, {0, 1});
  const auto test = FeatureMatrix::from_rows({"a"}, {{4}}, {1}, DatasetKind::Baseline,
                                             Partition::Test);
  const std::vector<FeatureMatrix> others{test};
  const auto s = standardize(train, others);
  ASSERT_EQ(s.others.size(), 1u);
  EXPECT_EQ(s.others[0].at(0, 0), 3.0);
  EXPECT_EQ(s.others[0].partition(), Partition::Test);
  const auto back = Standardizer::from_json(s.params.to_json());
  EXPECT_EQ(back.mean, s.params.mean);
  EXPECT_EQ(back.scale, s.params.scale);
  const auto wrong = FeatureMatrix::from_rows({"b"}, {{1}}, {1});
  EXPECT_THROW(s.params.apply(wrong), SchemaError);
}

TEST(FeatureMatrixIo, CsvRoundTripIsExact) {
  TempDir dir;
  const auto m = FeatureMatrix::from_rows({"x", "y"}, {{0.1, 1e-300}, {-2.5, 1.0 / 3.0}}, {1, 0},
                                          DatasetKind::Topological, Partition::Unseen);
  write_feature_matrix_csv(m, dir / "m.csv");
  const auto back = read_feature_matrix_csv(dir / "m.csv", DatasetKind::Topological,
                                            Partition::Unseen);
  EXPECT_EQ(back, m);
  write_text(dir / "bad.csv", "x,y\n1,2\n");
  EXPECT_THROW(read_feature_matrix_csv(dir / "bad.csv", DatasetKind::Baseline, Partition::Train),
               ParseError);
}

TEST(FeatureMatrixIo, SelectColumnsAndRows) {
  const auto m = FeatureMatrix::from_rows({"a", "b", "c"}, {{1, 2, 3}, {4, 5, 6}}, {0, 1});
  const std::vector<std::string> cols{"c", "a"};
  const auto s = m.select_columns(cols);
  EXPECT_EQ(s.column_names(), cols);
  EXPECT_EQ(s.at(1, 0), 6.0);
  EXPECT_EQ(s.at(1, 1), 4.0);
  const std::vector<std::size_t> rows{1};
  EXPECT_EQ(m.select_rows(rows).labels(), std::vector<int>{1});
  const std::vector<std::string> missing{"z"};
  EXPECT_THROW(m.select_columns(missing), SchemaError);
}

TEST(SamplesIo, RoundTripWithOriginalIds) {
  TempDir dir;
  std::vector<Edge> edges{{0, 1}, {1, 2}};
  const auto g = AttributedGraph::from_edges(3, edges, {}, "net", {10, 20, 30});
  const std::vector<PartitionedSample> samples{{{"net", 0, 1, 1}, Partition::Train},
                                               {{"net", 0, 2, 0}, Partition::Unseen}};
  const std::vector<const AttributedGraph*> graphs{&g};
  write_samples_csv(samples, graphs, dir / "s.csv");
  EXPECT_NE(read_text(dir / "s.csv").find("net,10,30,0,unseen"), std::string::npos);
  const auto back = read_samples_csv(dir / "s.csv", graphs);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].sample, samples[1].sample);
  EXPECT_EQ(back[1].partition, Partition::Unseen);
}

}  // namespace
