#include "linkpred/node2vec.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "linkpred/errors.hpp"
#include "linkpred/parallel.hpp"
#include "linkpred/random.hpp"
#include "text_io.hpp"

namespace linkpred {

void WalkConfig::validate() const {
  if (dimensions < 1) throw DomainError("node2vec: dimensions must be >= 1");
  if (walk_length < 2) throw DomainError("node2vec: walk_length must be >= 2");
  if (!(return_p > 0.0)) throw DomainError("node2vec: return parameter p must be > 0");
  if (!(in_out_q > 0.0)) throw DomainError("node2vec: in-out parameter q must be > 0");
  if (!(learning_rate > 0.0)) throw DomainError("node2vec: learning rate must be > 0");
}

// ---------------------------------------------------------------------------
// walks

namespace {

/// Per-worker cache of second-order transition tables keyed by (prev, cur).
class TransitionCache {
 public:
  TransitionCache(const AttributedGraph& g, double p, double q) : g_(g), p_(p), q_(q) {}

  const AliasTable& table(NodeId prev, NodeId cur) {
    const std::uint64_t key = (std::uint64_t(prev) << 32) | cur;
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    if (entries_ > kMaxEntries) {
      tables_.clear();
      entries_ = 0;
    }
    const auto nb = g_.neighbors(cur);
    const auto prev_nb = g_.neighbors(prev);
    weights_.resize(nb.size());
    auto j = prev_nb.begin();
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const NodeId x = nb[k];
      while (j != prev_nb.end() && *j < x) ++j;
      if (x == prev) {
        weights_[k] = 1.0 / p_;
      } else if (j != prev_nb.end() && *j == x) {
        weights_[k] = 1.0;
      } else {
        weights_[k] = 1.0 / q_;
      }
    }
    entries_ += nb.size();
    return tables_.emplace(key, AliasTable(weights_)).first->second;
  }

 private:
  static constexpr std::size_t kMaxEntries = std::size_t(1) << 25;
  const AttributedGraph& g_;
  double p_, q_;
  std::unordered_map<std::uint64_t, AliasTable> tables_;
  std::vector<double> weights_;
  std::size_t entries_ = 0;
};

Walk walk_from(const AttributedGraph& g, NodeId start, std::size_t length, bool unbiased,
               TransitionCache& cache, Rng& rng) {
  Walk walk;
  walk.nodes.reserve(length);
  walk.nodes.push_back(start);
  while (walk.nodes.size() < length) {
    const NodeId cur = walk.nodes.back();
    const auto nb = g.neighbors(cur);
    if (nb.empty()) break;
    std::size_t k;
    if (walk.nodes.size() == 1 || unbiased) {
      k = uniform_index(rng, nb.size());
    } else {
      k = cache.table(walk.nodes[walk.nodes.size() - 2], cur).sample(rng);
    }
    walk.nodes.push_back(nb[k]);
  }
  return walk;
}

}  // namespace

std::vector<Walk> generate_walks(const AttributedGraph& g, const WalkConfig& cfg,
                                 WalkReport* report) {
  cfg.validate();
  if (g.empty()) throw DomainError("generate_walks on an empty graph");

  std::vector<NodeId> starts;
  std::vector<NodeId> isolated;
  for (NodeId u = 0; u < g.node_count(); ++u) (g.degree(u) > 0 ? starts : isolated).push_back(u);

  const bool unbiased = cfg.return_p == 1.0 && cfg.in_out_q == 1.0;
  const std::size_t workers = std::max<std::size_t>(1, cfg.threads);
  std::vector<TransitionCache> caches(workers, TransitionCache(g, cfg.return_p, cfg.in_out_q));

  std::vector<Walk> walks(cfg.walks_per_node * starts.size());
  for (std::size_t round = 0; round < cfg.walks_per_node; ++round) {
    std::vector<NodeId> order = starts;
    Rng order_rng(derive_seed(cfg.seed, round, 0x6f72646572ULL));
    shuffle(order, order_rng);
    parallel_for_blocks(order.size(), workers, [&](std::size_t w, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        // one independent stream per (start node, round)
        Rng rng(derive_seed(cfg.seed, order[i], round + 1));
        walks[round * order.size() + i] =
            walk_from(g, order[i], cfg.walk_length, unbiased, caches[w], rng);
      }
    });
  }
  if (report) {
    report->walk_count = walks.size();
    report->isolated_nodes = std::move(isolated);
  }
  return walks;
}

// ---------------------------------------------------------------------------
// embeddings

EmbeddingTable::EmbeddingTable(std::size_t node_count, std::size_t dimensions, WalkConfig config,
                               std::string network_id)
    : node_count_(node_count),
      dimensions_(dimensions),
      values_(node_count * dimensions, 0.0),
      config_(std::move(config)),
      network_id_(std::move(network_id)) {}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// -log s(x), stable for large |x|.
double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <bool Shared>
double load(const double& x) {
  if constexpr (Shared) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Shared>
void add(double& x, double delta) {
  if constexpr (Shared) {
    std::atomic_ref<double> ref(x);
    ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
  } else {
    x += delta;
  }
}

}  // namespace

SkipGramGradient skipgram_loss_and_gradient(std::span<const double> center,
                                            std::span<const double> context,
                                            std::span<const std::vector<double>> negatives) {
  const std::size_t d = center.size();
  SkipGramGradient out;
  out.center.assign(d, 0.0);
  out.context.assign(d, 0.0);

  const double pos = dot(center, context);
  out.loss = neg_log_sigmoid(pos);
  const double g_pos = sigmoid(pos) - 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    out.center[i] += g_pos * context[i];
    out.context[i] = g_pos * center[i];
  }
  for (const auto& neg : negatives) {
    const double s = dot(center, neg);
    out.loss += neg_log_sigmoid(-s);
    const double g_neg = sigmoid(s);
    std::vector<double> grad(d);
    for (std::size_t i = 0; i < d; ++i) {
      out.center[i] += g_neg * neg[i];
      grad[i] = g_neg * center[i];
    }
    out.negatives.push_back(std::move(grad));
  }
  return out;
}

SkipGramTrainer::SkipGramTrainer(std::span<const Walk> walks, const WalkConfig& cfg,
                                 std::size_t node_count)
    : walks_(walks), cfg_(cfg), node_count_(node_count) {
  cfg_.validate();
  if (walks.empty()) throw DomainError("train_embeddings: empty walk list");

  std::vector<double> counts(node_count, 0.0);
  seen_.assign(node_count, false);
  for (const Walk& w : walks) {
    for (NodeId u : w.nodes) {
      if (u >= node_count) {
        throw DomainError(fmt::format("walk visits node {} outside [0, {})", u, node_count));
      }
      counts[u] += 1.0;
      seen_[u] = true;
    }
    total_tokens_ += w.nodes.size();
  }
  if (total_tokens_ == 0) throw DomainError("train_embeddings: walks contain no nodes");
  unigram_.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i) unigram_[i] = std::pow(counts[i], 0.75);

  const std::size_t d = cfg_.dimensions;
  input_.assign(node_count * d, 0.0);
  output_.assign(node_count * d, 0.0);
  Rng rng(derive_seed(cfg_.seed, "skipgram-init"));
  for (double& x : input_) x = (uniform01(rng) - 0.5) / static_cast<double>(d);
}

template <bool Shared>
void SkipGramTrainer::train_range(std::size_t first_walk, std::size_t last_walk,
                                  std::uint64_t stream, std::size_t& processed) {
  const std::size_t d = cfg_.dimensions;
  const std::size_t window = cfg_.window;
  const double total = static_cast<double>(total_tokens_ * cfg_.epochs);
  const double min_rate = cfg_.learning_rate * 1e-4;
  const std::size_t share = Shared ? std::max<std::size_t>(1, cfg_.threads) : 1;
  const AliasTable noise(unigram_);
  Rng rng(stream);

  std::vector<double> grad_h(d);
  std::vector<double> h(d);
  for (std::size_t wi = first_walk; wi < last_walk; ++wi) {
    const auto& nodes = walks_[wi].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double progress = static_cast<double>(processed * share) / total;
      const double rate = std::max(min_rate, cfg_.learning_rate * (1.0 - progress));
      ++processed;
      const NodeId center = nodes[i];
      double* in = input_.data() + std::size_t(center) * d;
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(nodes.size(), i + window + 1);
      for (std::size_t j = lo; j < hi; ++j) {
        if (j == i) continue;
        const NodeId context = nodes[j];
        for (std::size_t k = 0; k < d; ++k) h[k] = load<Shared>(in[k]);
        std::fill(grad_h.begin(), grad_h.end(), 0.0);
        for (std::size_t s = 0; s <= cfg_.negatives_per_positive; ++s) {
          NodeId target;
          double label;
          if (s == 0) {
            target = context;
            label = 1.0;
          } else {
            target = static_cast<NodeId>(noise.sample(rng));
            if (target == context) continue;
            label = 0.0;
          }
          double* out = output_.data() + std::size_t(target) * d;
          double f = 0.0;
          for (std::size_t k = 0; k < d; ++k) f += h[k] * load<Shared>(out[k]);
          const double g = (label - sigmoid(f)) * rate;
          for (std::size_t k = 0; k < d; ++k) {
            grad_h[k] += g * load<Shared>(out[k]);
            add<Shared>(out[k], g * h[k]);
          }
        }
        for (std::size_t k = 0; k < d; ++k) add<Shared>(in[k], grad_h[k]);
      }
    }
  }
}

void SkipGramTrainer::run_epoch() {
  const std::size_t threads = std::max<std::size_t>(1, cfg_.threads);
  const std::uint64_t epoch_seed = derive_seed(cfg_.seed, epochs_run_, 0x6e6567ULL);
  if (threads == 1) {
    train_range<false>(0, walks_.size(), epoch_seed, processed_);
  } else {
    // lock-free shared updates; races between workers are tolerated
    parallel_for_blocks(walks_.size(), threads,
                        [&](std::size_t w, std::size_t b, std::size_t e) {
                          std::size_t local = processed_ / threads;
                          train_range<true>(b, e, derive_seed(epoch_seed, w, 1), local);
                        });
    processed_ += total_tokens_;
  }
  ++epochs_run_;
}

double SkipGramTrainer::mean_loss(std::span<const SkipGramExample> batch) const {
  if (batch.empty()) return 0.0;
  const std::size_t d = cfg_.dimensions;
  auto in = [&](NodeId u) { return std::span<const double>(input_.data() + std::size_t(u) * d, d); };
  auto out = [&](NodeId u) {
    return std::span<const double>(output_.data() + std::size_t(u) * d, d);
  };
  double total = 0.0;
  for (const auto& ex : batch) {
    total += neg_log_sigmoid(dot(in(ex.center), out(ex.context)));
    for (NodeId n : ex.negatives) total += neg_log_sigmoid(-dot(in(ex.center), out(n)));
  }
  return total / static_cast<double>(batch.size());
}

std::vector<SkipGramExample> SkipGramTrainer::sample_examples(std::size_t count,
                                                              std::uint64_t seed) const {
  Rng rng(seed);
  const AliasTable noise(unigram_);
  std::vector<SkipGramExample> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto& nodes = walks_[uniform_index(rng, walks_.size())].nodes;
    if (nodes.size() < 2) continue;
    const std::size_t i = uniform_index(rng, nodes.size());
    const std::size_t lo = i >= cfg_.window ? i - cfg_.window : 0;
    const std::size_t hi = std::min(nodes.size(), i + cfg_.window + 1);
    const std::size_t j = lo + uniform_index(rng, hi - lo);
    if (j == i) continue;
    SkipGramExample ex{nodes[i], nodes[j], {}};
    for (std::size_t s = 0; s < cfg_.negatives_per_positive; ++s) {
      ex.negatives.push_back(static_cast<NodeId>(noise.sample(rng)));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

EmbeddingTable SkipGramTrainer::embeddings(std::string network_id) const {
  EmbeddingTable table(node_count_, cfg_.dimensions, cfg_, std::move(network_id));
  for (NodeId u = 0; u < node_count_; ++u) {
    if (!seen_[u]) continue;
    auto dst = table.vector(u);
    std::copy_n(input_.begin() + std::size_t(u) * cfg_.dimensions, cfg_.dimensions, dst.begin());
  }
  return table;
}

EmbeddingTable train_embeddings(std::span<const Walk> walks, const WalkConfig& cfg,
                                std::size_t node_count, std::string network_id) {
  SkipGramTrainer trainer(walks, cfg, node_count);
  for (std::size_t e = 0; e < cfg.epochs; ++e) trainer.run_epoch();
  auto table = trainer.embeddings(std::move(network_id));
  for (double x : table.values()) {
    if (!std::isfinite(x)) throw DivergenceError("node2vec: non-finite embedding; lower the learning rate");
  }
  return table;
}

EmbeddingTable node2vec(const AttributedGraph& g, const WalkConfig& cfg, WalkReport* report) {
  const auto walks = generate_walks(g, cfg, report);
  return train_embeddings(walks, cfg, g.node_count(), g.network_id());
}

std::vector<double> edge_embedding(const EmbeddingTable& table, NodeId u, NodeId v) {
  if (u >= table.node_count() || v >= table.node_count()) {
    throw DomainError(fmt::format("no embedding vector for node {} (table has {} nodes)",
                                  u >= table.node_count() ? u : v, table.node_count()));
  }
  const auto a = table.vector(u);
  const auto b = table.vector(v);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

// ---------------------------------------------------------------------------
// grid search

std::vector<GridEntry> grid_search_embeddings(const AttributedGraph& g,
                                              std::span<const WalkConfig> grid,
                                              const EmbeddingEvaluator& evaluator) {
  if (grid.empty()) throw DomainError("grid_search_embeddings: empty grid");
  std::vector<GridEntry> entries;
  entries.reserve(grid.size());
  for (const auto& cfg : grid) {
    GridEntry entry{cfg, std::nullopt, {}, 0};
    try {
      const double s = evaluator(node2vec(g, cfg));
      if (!std::isfinite(s)) throw NumericError("evaluator returned a non-finite score");
      entry.score = s;
    } catch (const std::exception& e) {
      entry.failure = e.what();
    }
    entries.push_back(std::move(entry));
  }
  std::stable_sort(entries.begin(), entries.end(), [](const GridEntry& a, const GridEntry& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (!a.score) return false;
    if (*a.score != *b.score) return *a.score > *b.score;
    return a.config.dimensions < b.config.dimensions;
  });
  std::size_t rank = 0;
  for (auto& e : entries) {
    if (e.score) e.rank = ++rank;
  }
  return entries;
}

void write_grid_report_csv(std::span<const GridEntry> entries, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "dims,walks,length,p,q,score,rank\n";
  for (const auto& e : entries) {
    const auto& c = e.config;
    out << fmt::format("{},{},{},{},{},{},{}\n", c.dimensions, c.walks_per_node, c.walk_length,
                       c.return_p, c.in_out_q, e.score ? detail::exact(*e.score) : "failed",
                       e.score ? std::to_string(e.rank) : "");
  }
}

// ---------------------------------------------------------------------------
// persistence

void write_embeddings_text(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << table.node_count() << ' ' << table.dimensions() << '\n';
  std::string line;
  for (NodeId u = 0; u < table.node_count(); ++u) {
    line = std::to_string(u);
    for (double x : table.vector(u)) {
      line += ' ';
      line += detail::exact(x);
    }
    out << line << '\n';
  }
}

EmbeddingTable read_embeddings_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open embedding file '{}'", path.string()));
  const std::string file = path.string();
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(file, 1, "missing header");
  const auto header = detail::tokenize(line);
  std::size_t n = 0, d = 0;
  if (header.size() != 2 || !detail::parse_int(header[0], n) || !detail::parse_int(header[1], d)) {
    throw ParseError(file, 1, "expected header 'node_count dimensions'");
  }
  EmbeddingTable table(n, d);
  std::vector<bool> filled(n, false);
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::tokenize(line);
    if (tokens.empty()) continue;
    std::size_t id = 0;
    if (tokens.size() != d + 1 || !detail::parse_int(tokens[0], id) || id >= n || filled[id]) {
      throw ParseError(file, line_no, "malformed or duplicate embedding row");
    }
    auto vec = table.vector(static_cast<NodeId>(id));
    for (std::size_t k = 0; k < d; ++k) {
      if (!detail::parse_double(tokens[k + 1], vec[k])) {
        throw ParseError(file, line_no, fmt::format("bad value '{}'", tokens[k + 1]));
      }
    }
    filled[id] = true;
  }
  if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
    throw ParseError(file, line_no, "embedding file is missing node rows");
  }
  return table;
}

namespace {
constexpr char kEmbeddingMagic[8] = {'L', 'P', 'E', 'M', 'B', '0', '0', '1'};
}

void write_embeddings_binary(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  const std::uint64_t n = table.node_count();
  const std::uint64_t d = table.dimensions();
  out.write(kEmbeddingMagic, sizeof kEmbeddingMagic);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  out.write(reinterpret_cast<const char*>(table.values().data()),
            static_cast<std::streamsize>(table.values().size() * sizeof(double)));
}

EmbeddingTable read_embeddings_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open embedding file '{}'", path.string()));
  char magic[8];
  std::uint64_t n = 0, d = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  if (!in || std::memcmp(magic, kEmbeddingMagic, sizeof magic) != 0) {
    throw FormatError(fmt::format("'{}' is not a binary embedding table", path.string()));
  }
  EmbeddingTable table(n, d);
  for (NodeId u = 0; u < n; ++u) {
    auto vec = table.vector(u);
    in.read(reinterpret_cast<char*>(vec.data()), static_cast<std::streamsize>(d * sizeof(double)));
  }
  if (!in) throw FormatError(fmt::format("'{}' is truncated", path.string()));
  return table;
}

}  // namespace linkpred
