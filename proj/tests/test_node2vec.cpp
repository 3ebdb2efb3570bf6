#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "linkpred/errors.hpp"
#include "linkpred/generators.hpp"
#include "linkpred/node2vec.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace linkpred;
using namespace linkpred::testing;

WalkConfig small_config() {
  WalkConfig cfg;
  cfg.dimensions = 8;
  cfg.walks_per_node = 4;
  cfg.walk_length = 10;
  cfg.window = 3;
  cfg.epochs = 2;
  cfg.seed = 5;
  return cfg;
}

TEST(Walks, StarGraphAlternates) {
  const auto g = star_graph(6);
  auto cfg = small_config();
  cfg.return_p = 0.5;
  cfg.in_out_q = 2.0;
  WalkReport report;
  const auto walks = generate_walks(g, cfg, &report);
  EXPECT_EQ(walks.size(), 7 * cfg.walks_per_node);
  EXPECT_EQ(report.walk_count, walks.size());
  EXPECT_TRUE(report.isolated_nodes.empty());
  for (const auto& w : walks) {
    ASSERT_EQ(w.nodes.size(), cfg.walk_length);
    for (std::size_t i = 0; i + 1 < w.nodes.size(); ++i) {
      EXPECT_TRUE((w.nodes[i] == 0) != (w.nodes[i + 1] == 0));
    }
  }
}

TEST(Walks, StepsFollowEdgesAndSkipIsolatedNodes) {
  Rng rng(4);
  const auto g = random_graph(40, 0.1, rng);
  std::size_t isolated = 0;
  for (NodeId u = 0; u < 40; ++u) isolated += g.degree(u) == 0;
  auto cfg = small_config();
  cfg.return_p = 2.0;
  cfg.in_out_q = 0.25;
  WalkReport report;
  const auto walks = generate_walks(g, cfg, &report);
  EXPECT_EQ(report.isolated_nodes.size(), isolated);
  EXPECT_EQ(walks.size(), (40 - isolated) * cfg.walks_per_node);
  std::map<NodeId, std::size_t> starts;
  for (const auto& w : walks) {
    ASSERT_FALSE(w.nodes.empty());
    ++starts[w.nodes.front()];
    for (std::size_t i = 0; i + 1 < w.nodes.size(); ++i) {
      EXPECT_TRUE(g.has_edge(w.nodes[i], w.nodes[i + 1]));
    }
  }
  for (const auto& [u, c] : starts) EXPECT_EQ(c, cfg.walks_per_node) << u;
}

TEST(Walks, UnbiasedStepsAreUniform) {
  Rng rng(77);
  const auto g = random_graph(30, 0.25, rng);
  auto cfg = small_config();
  cfg.return_p = 1.0;
  cfg.in_out_q = 1.0;
  cfg.walk_length = 21;
  cfg.walks_per_node = 200;
  const auto walks = generate_walks(g, cfg);
  std::map<std::pair<NodeId, NodeId>, double> counts;
  std::vector<double> out(g.node_count(), 0.0);
  std::size_t steps = 0;
  for (const auto& w : walks) {
    for (std::size_t i = 0; i + 1 < w.nodes.size(); ++i) {
      counts[{w.nodes[i], w.nodes[i + 1]}] += 1;
      out[w.nodes[i]] += 1;
      ++steps;
    }
  }
  ASSERT_GE(steps, 100000u);
  double chi2 = 0, dof = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (g.degree(u) < 2) continue;
    const double expected = out[u] / double(g.degree(u));
    for (NodeId v : g.neighbors(u)) {
      const double c = counts[{u, v}];
      chi2 += (c - expected) * (c - expected) / expected;
    }
    dof += double(g.degree(u) - 1);
  }
  EXPECT_GT(chi2_pvalue(chi2, dof), 0.01) << "chi2=" << chi2 << " dof=" << dof;
}

TEST(Walks, BiasedStepsMatchTransitionWeights) {
  // node 0 - 1, with 1 adjacent to 2 (also adjacent to 0) and 3, 4 (not adjacent to 0)
  const auto g = graph_of(5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {1, 4}});
  auto cfg = small_config();
  cfg.return_p = 4.0;
  cfg.in_out_q = 0.5;
  cfg.walk_length = 3;
  cfg.walks_per_node = 40000;
  const auto walks = generate_walks(g, cfg);
  std::map<NodeId, double> next;
  double total = 0;
  for (const auto& w : walks) {
    if (w.nodes[0] == 0 && w.nodes[1] == 1) {
      next[w.nodes[2]] += 1;
      total += 1;
    }
  }
  // weights 1/p for the return, 1 for 2, 1/q for 3 and 4
  const std::map<NodeId, double> weight{{0, 0.25}, {2, 1.0}, {3, 2.0}, {4, 2.0}};
  const double wsum = 5.25;
  double chi2 = 0;
  for (const auto& [x, w] : weight) {
    const double expected = total * w / wsum;
    chi2 += (next[x] - expected) * (next[x] - expected) / expected;
  }
  EXPECT_GT(total, 5000);
  EXPECT_GT(chi2_pvalue(chi2, 3), 0.001) << chi2;
}

TEST(Walks, LargeInOutParameterBacktracksOnPath) {
  const auto g = path_graph(12);
  auto cfg = small_config();
  cfg.return_p = 1.0;
  cfg.in_out_q = 1e9;
  const auto walks = generate_walks(g, cfg);
  for (const auto& w : walks) {
    for (std::size_t i = 0; i + 2 < w.nodes.size(); ++i) EXPECT_EQ(w.nodes[i + 2], w.nodes[i]);
  }
}

TEST(Walks, DeterministicAcrossThreadCounts) {
  const auto g = powerlaw_cluster(300, 3, 0.5, 8);
  auto cfg = small_config();
  cfg.threads = 1;
  const auto a = generate_walks(g, cfg);
  cfg.threads = 3;
  const auto b = generate_walks(g, cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].nodes, b[i].nodes);
  cfg.seed = 6;
  const auto c = generate_walks(g, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].nodes != c[i].nodes;
  EXPECT_TRUE(differs);
}

TEST(Walks, RejectsBadConfig) {
  const auto g = complete_graph(4);
  auto cfg = small_config();
  cfg.walk_length = 1;
  EXPECT_THROW(generate_walks(g, cfg), DomainError);
  cfg = small_config();
  cfg.in_out_q = 0.0;
  EXPECT_THROW(generate_walks(g, cfg), DomainError);
  cfg = small_config();
  cfg.dimensions = 0;
  EXPECT_THROW(node2vec(g, cfg), DomainError);
}

TEST(SkipGram, GradientMatchesFiniteDifferences) {
  Rng rng(31);
  const double h = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t d = 2 + uniform_index(rng, 10);
    const std::size_t k = 1 + uniform_index(rng, 5);
    auto vec = [&] {
      std::vector<double> v(d);
      for (double& x : v) x = uniform01(rng) * 2 - 1;
      return v;
    };
    auto c = vec(), o = vec();
    std::vector<std::vector<double>> negs;
    for (std::size_t j = 0; j < k; ++j) negs.push_back(vec());
    const auto grad = skipgram_loss_and_gradient(c, o, negs);
    auto loss = [&] { return skipgram_loss_and_gradient(c, o, negs).loss; };
    auto check = [&](std::vector<double>& v, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < d; ++i) {
        const double saved = v[i];
        v[i] = saved + h;
        const double up = loss();
        v[i] = saved - h;
        const double down = loss();
        v[i] = saved;
        EXPECT_LT(rel_error((up - down) / (2 * h), analytic[i]), 1e-4) << "trial " << trial;
      }
    };
    check(c, grad.center);
    check(o, grad.context);
    for (std::size_t j = 0; j < k; ++j) check(negs[j], grad.negatives[j]);
  }
}

TEST(SkipGram, TrainingReducesLoss) {
  const auto g = powerlaw_cluster(200, 3, 0.6, 2);
  auto cfg = small_config();
  cfg.epochs = 1;
  const auto walks = generate_walks(g, cfg);
  SkipGramTrainer trainer(walks, cfg, g.node_count());
  const auto batch = trainer.sample_examples(2000, 99);
  const double before = trainer.mean_loss(batch);
  for (int e = 0; e < 3; ++e) trainer.run_epoch();
  EXPECT_EQ(trainer.epochs_run(), 3u);
  EXPECT_LT(trainer.mean_loss(batch), before);
}

TEST(SkipGram, SequentialTrainingIsBitwiseReproducible) {
  const auto g = powerlaw_cluster(200, 3, 0.6, 2);
  auto cfg = small_config();
  cfg.threads = 1;
  const auto a = node2vec(g, cfg);
  const auto b = node2vec(g, cfg);
  EXPECT_EQ(a.values(), b.values());
  cfg.seed = 99;
  EXPECT_NE(node2vec(g, cfg).values(), a.values());
}

TEST(SkipGram, EmptyWalksRejected) {
  std::vector<Walk> none;
  EXPECT_THROW(train_embeddings(none, small_config(), 3), DomainError);
  std::vector<Walk> outside{{{0, 7}}};
  EXPECT_THROW(train_embeddings(outside, small_config(), 3), DomainError);
}

TEST(SkipGram, UnvisitedNodesGetZeroVectors) {
  const auto g = graph_of(4, {{0, 1}, {1, 2}});
  const auto table = node2vec(g, small_config());
  for (double x : table.vector(3)) EXPECT_EQ(x, 0.0);
}

TEST(SkipGram, TwoCliquesSeparate) {
  std::vector<Edge> edges;
  for (NodeId base : {0u, 10u}) {
    for (NodeId u = 0; u < 10; ++u) {
      for (NodeId v = u + 1; v < 10; ++v) edges.push_back({base + u, base + v});
    }
  }
  edges.push_back({0, 10});
  const auto g = AttributedGraph::from_edges(20, edges);
  WalkConfig cfg;
  cfg.dimensions = 16;
  cfg.walks_per_node = 20;
  cfg.walk_length = 20;
  cfg.window = 5;
  cfg.epochs = 5;
  cfg.seed = 3;
  const auto table = node2vec(g, cfg);
  double intra = 0, inter = 0;
  std::size_t n_intra = 0, n_inter = 0;
  for (NodeId u = 0; u < 20; ++u) {
    for (NodeId v = u + 1; v < 20; ++v) {
      const double c = cosine(table.vector(u), table.vector(v));
      if ((u < 10) == (v < 10)) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  EXPECT_GE(intra / n_intra - inter / n_inter, 0.2);
}

TEST(EdgeEmbedding, HadamardProduct) {
  EmbeddingTable table(2, 2);
  table.vector(0)[0] = 1;
  table.vector(0)[1] = 2;
  table.vector(1)[0] = 3;
  table.vector(1)[1] = 4;
  EXPECT_EQ(edge_embedding(table, 0, 1), (std::vector<double>{3, 8}));
  EXPECT_EQ(edge_embedding(table, 1, 0), edge_embedding(table, 0, 1));
  EXPECT_THROW(edge_embedding(table, 0, 2), DomainError);
}

TEST(EmbeddingIo, TextAndBinaryRoundTrip) {
  TempDir dir;
  const auto table = node2vec(powerlaw_cluster(50, 2, 0.3, 1), small_config());
  write_embeddings_text(table, dir / "e.txt");
  write_embeddings_binary(table, dir / "e.bin");
  const auto t = read_embeddings_text(dir / "e.txt");
  const auto b = read_embeddings_binary(dir / "e.bin");
  EXPECT_EQ(t.values(), table.values());
  EXPECT_EQ(b.values(), table.values());
  EXPECT_EQ(t.dimensions(), table.dimensions());
  EXPECT_EQ(b.node_count(), table.node_count());
}

TEST(EmbeddingIo, RejectsMalformedFiles) {
  TempDir dir;
  write_text(dir / "short.txt", "2 2\n0 1 2\n");
  EXPECT_THROW(read_embeddings_text(dir / "short.txt"), ParseError);
  write_text(dir / "bad.txt", "2 2\n0 1 2\n1 x 2\n");
  EXPECT_THROW(read_embeddings_text(dir / "bad.txt"), ParseError);
  write_text(dir / "bad.bin", "not an embedding");
  EXPECT_THROW(read_embeddings_binary(dir / "bad.bin"), FormatError);
}

TEST(GridSearch, RanksByScoreThenDimensions) {
  const auto g = powerlaw_cluster(60, 2, 0.3, 1);
  auto c64 = small_config();
  c64.dimensions = 64;
  auto c32 = small_config();
  c32.dimensions = 32;
  auto c16 = small_config();
  c16.dimensions = 16;
  auto broken = small_config();
  broken.walk_length = 1;
  auto c8 = small_config();
  c8.dimensions = 8;
  const std::vector<WalkConfig> grid{broken, c64, c32, c16, c8};
  const auto entries = grid_search_embeddings(g, grid, [](const EmbeddingTable& t) {
    if (t.dimensions() == 8) throw NumericError("evaluator failed");
    return t.dimensions() == 16 ? 0.5 : 0.9;
  });
  ASSERT_EQ(entries.size(), 5u);
  EXPECT_EQ(entries[0].config.dimensions, 32u);
  EXPECT_EQ(entries[0].rank, 1u);
  EXPECT_EQ(entries[1].config.dimensions, 64u);
  EXPECT_EQ(entries[2].config.dimensions, 16u);
  EXPECT_EQ(entries[2].rank, 3u);
  for (std::size_t i = 3; i < 5; ++i) {
    EXPECT_FALSE(entries[i].score.has_value());
    EXPECT_EQ(entries[i].rank, 0u);
    EXPECT_FALSE(entries[i].failure.empty());
  }
  TempDir dir;
  write_grid_report_csv(entries, dir / "grid.csv");
  EXPECT_NE(read_text(dir / "grid.csv").find("failed"), std::string::npos);
}

TEST(GridSearch, SingleConfig) {
  const auto g = powerlaw_cluster(60, 2, 0.3, 1);
  const std::vector<WalkConfig> grid{small_config()};
  const auto entries = grid_search_embeddings(g, grid, [](const EmbeddingTable&) { return 0.7; });
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].rank, 1u);
  EXPECT_EQ(*entries[0].score, 0.7);
  EXPECT_THROW(grid_search_embeddings(g, {}, [](const EmbeddingTable&) { return 0.0; }),
               DomainError);
}

}  // namespace
