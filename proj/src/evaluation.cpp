#include "linkpred/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "linkpred/errors.hpp"
#include "linkpred/random.hpp"
#include "text_io.hpp"

namespace linkpred {

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels,
                  std::string_view who, std::size_t& pos, std::size_t& neg) {
  if (scores.size() != labels.size()) {
    throw DomainError(fmt::format("{}: {} scores but {} labels", who, scores.size(),
                                  labels.size()));
  }
  pos = 0;
  neg = 0;
  for (int y : labels) {
    if (y == 1) ++pos;
    else if (y == 0) ++neg;
    else throw DomainError(fmt::format("{}: labels must be 0 or 1, got {}", who, y));
  }
  if (pos == 0 || neg == 0) {
    throw DomainError(fmt::format("{}: need both classes (positives {}, negatives {})", who, pos,
                                  neg));
  }
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, "auroc", pos, neg);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // sum of positive ranks, tied groups sharing their average rank; ranks are
  // kept doubled so every quantity stays an integer
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      pos_in_group += labels[order[j]] == 1;
      ++j;
    }
    // ranks i+1 .. j, average (i + 1 + j) / 2
    rank_sum2 += pos_in_group * (i + 1 + j);
    i = j;
  }
  const std::uint64_t u2 = rank_sum2 - pos * (pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

F1Accuracy f1_accuracy(std::span<const double> scores, std::span<const int> labels,
                       double threshold) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, "f1_accuracy", pos, neg);
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      if (predicted) ++tp; else ++fn;
    } else {
      if (predicted) ++fp; else ++tn;
    }
  }
  F1Accuracy r;
  r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  const double denom = static_cast<double>(2 * tp + fp + fn);
  r.f1 = tp == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  return r;
}

EvalReport evaluate(const TrainedModel& model, const FeatureMatrix& x) {
  const auto s = score(model, x);
  EvalReport r;
  r.dataset = x.kind();
  r.partition = x.partition();
  r.model = model.kind();
  r.auroc = auroc(s, x.labels());
  const auto fa = f1_accuracy(s, x.labels(), model.threshold());
  r.f1 = fa.f1;
  r.accuracy = fa.accuracy;
  r.n_pos = x.count_label(1);
  r.n_neg = x.count_label(0);
  return r;
}

std::string results_csv_row(const EvalReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{}", to_string(r.dataset), to_string(r.partition),
                     to_string(r.model), detail::exact(r.auroc), detail::exact(r.f1),
                     detail::exact(r.accuracy), r.n_pos, r.n_neg);
}

void write_results_csv(std::span<const EvalReport> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "dataset,partition,model,auroc,f1,accuracy,n_pos,n_neg\n";
  for (const auto& r : rows) out << results_csv_row(r) << '\n';
}

std::vector<EvalReport> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError(fmt::format("missing results file '{}'", path.string()));
  const std::string file = path.string();
  std::string line;
  std::getline(in, line);
  std::vector<EvalReport> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(detail::trim(line), ',');
    if (f.size() != 8) throw ParseError(file, line_no, "expected 8 fields");
    EvalReport r;
    r.dataset = parse_dataset_kind(f[0]);
    r.partition = parse_partition(f[1]);
    r.model = parse_model_kind(f[2]);
    if (!detail::parse_double(f[3], r.auroc) || !detail::parse_double(f[4], r.f1) ||
        !detail::parse_double(f[5], r.accuracy) || !detail::parse_int(f[6], r.n_pos) ||
        !detail::parse_int(f[7], r.n_neg)) {
      throw ParseError(file, line_no, "malformed number");
    }
    rows.push_back(r);
  }
  return rows;
}

LdaProbe lda_probe(const FeatureMatrix& x, std::size_t sample_size, std::uint64_t seed) {
  if (sample_size == 0 || sample_size > x.rows()) {
    throw DomainError(fmt::format("lda_probe: sample size {} outside 1..{}", sample_size,
                                  x.rows()));
  }
  const std::size_t d = x.cols();
  if (d == 0) throw DomainError("lda_probe: no feature columns");

  Rng rng(seed);
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates: the first sample_size entries are a uniform draw
  for (std::size_t i = 0; i < sample_size; ++i) {
    std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
  }
  idx.resize(sample_size);

  Eigen::MatrixXd data(sample_size, d);
  std::vector<int> labels(sample_size);
  for (std::size_t i = 0; i < sample_size; ++i) {
    const auto row = x.row(idx[i]);
    for (std::size_t j = 0; j < d; ++j) data(i, j) = row[j];
    labels[i] = x.labels()[idx[i]];
  }
  Eigen::VectorXd mu[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < sample_size; ++i) {
    mu[labels[i]] += data.row(i).transpose();
    ++count[labels[i]];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw DomainError("lda_probe: the sample must contain both classes");
  }
  mu[0] /= static_cast<double>(count[0]);
  mu[1] /= static_cast<double>(count[1]);

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < sample_size; ++i) {
    const Eigen::VectorXd c = data.row(i).transpose() - mu[labels[i]];
    sw.noalias() += c * c.transpose();
  }
  double ridge = 1e-6 * sw.trace() / static_cast<double>(d);
  if (!(ridge > 0)) ridge = 1e-12;
  sw.diagonal().array() += ridge;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sw);
  Eigen::VectorXd w = ldlt.solve(mu[1] - mu[0]);
  if (ldlt.info() != Eigen::Success || !w.allFinite()) {
    throw NumericError("lda_probe: within-class scatter is singular even after the ridge");
  }
  const double norm = w.norm();
  if (norm == 0) throw NumericError("lda_probe: class means coincide; no discriminant direction");
  w /= norm;

  LdaProbe probe;
  probe.direction.assign(w.data(), w.data() + d);
  const Eigen::VectorXd proj = data * w;
  probe.projected.assign(proj.data(), proj.data() + sample_size);
  probe.labels = labels;
  const double m0 = mu[0].dot(w);
  const double m1 = mu[1].dot(w);
  probe.threshold = 0.5 * (m0 + m1);
  probe.positive_above = m1 >= m0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < sample_size; ++i) {
    const bool above = proj[i] >= probe.threshold;
    correct += (above == probe.positive_above) == (labels[i] == 1);
  }
  probe.train_accuracy = static_cast<double>(correct) / static_cast<double>(sample_size);
  return probe;
}

void write_lda_csv(const LdaProbe& probe, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "# threshold=" << detail::exact(probe.threshold) << '\n';
  out << "coord,label\n";
  for (std::size_t i = 0; i < probe.projected.size(); ++i) {
    out << detail::exact(probe.projected[i]) << ',' << probe.labels[i] << '\n';
  }
}

}  // namespace linkpred
