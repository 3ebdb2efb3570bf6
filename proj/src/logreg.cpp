#include <algorithm>
#include <cmath>

#include "linkpred/classifiers.hpp"
#include "model_common.hpp"

namespace linkpred {

LogRegGradient logreg_loss_and_gradient(const FeatureMatrix& x, std::span<const double> weights,
                                        double bias, double l2_weight) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  LogRegGradient g;
  g.weights.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    double z = bias;
    for (std::size_t j = 0; j < d; ++j) z += weights[j] * row[j];
    const double y = x.labels()[i];
    g.loss += detail::bce_from_logit(z, y);
    const double r = detail::sigmoid(z) - y;
    for (std::size_t j = 0; j < d; ++j) g.weights[j] += r * row[j];
    g.bias += r;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  g.loss *= inv_n;
  g.bias *= inv_n;
  double sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    g.weights[j] = g.weights[j] * inv_n + l2_weight * weights[j];
    sq += weights[j] * weights[j];
  }
  g.loss += 0.5 * l2_weight * sq;
  return g;
}

namespace {

/// Upper bound on the largest eigenvalue of [X 1]^T [X 1] / n: the smaller of
/// the trace and the Gershgorin row-sum bound.
double gram_spectral_bound(const FeatureMatrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols() + 1;
  std::vector<double> gram(d * d, 0.0);
  std::vector<double> a(d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    std::copy(row.begin(), row.end(), a.begin());
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = 0; q < d; ++q) gram[p * d + q] += a[p] * a[q];
    }
  }
  double trace = 0.0;
  double gersh = 0.0;
  for (std::size_t p = 0; p < d; ++p) {
    trace += gram[p * d + p];
    double row_sum = 0.0;
    for (std::size_t q = 0; q < d; ++q) row_sum += std::abs(gram[p * d + q]);
    gersh = std::max(gersh, row_sum);
  }
  return std::min(trace, gersh) / static_cast<double>(n);
}

double objective(double smooth_loss, std::span<const double> w, const ModelConfig& cfg) {
  if (cfg.penalty != Penalty::L1) return smooth_loss;
  double l1 = 0.0;
  for (double v : w) l1 += std::abs(v);
  return smooth_loss + cfg.penalty_weight * l1;
}

}  // namespace

TrainedModel train_logreg(const FeatureMatrix& x, const ModelConfig& cfg, TrainingLog* log) {
  detail::require_trainable(x, "train_logreg");
  if (!(cfg.penalty_weight >= 0.0)) throw DomainError("train_logreg: negative penalty weight");
  const std::size_t d = x.cols();
  const double l2 = cfg.penalty == Penalty::L2 ? cfg.penalty_weight : 0.0;

  // proximal gradient descent; a step of at most 1/L keeps the objective monotone
  const double lipschitz = 0.25 * gram_spectral_bound(x) + l2;
  const double step = std::min(cfg.learning_rate, 1.0 / lipschitz);
  const double shrink = cfg.penalty == Penalty::L1 ? step * cfg.penalty_weight : 0.0;

  LogRegParams p;
  p.weights.assign(d, 0.0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto g = logreg_loss_and_gradient(x, p.weights, p.bias, l2);
    if (!std::isfinite(g.loss)) throw DivergenceError("train_logreg: non-finite loss");
    if (log) log->loss.push_back(objective(g.loss, p.weights, cfg));
    double change = std::abs(step * g.bias);
    p.bias -= step * g.bias;
    for (std::size_t j = 0; j < d; ++j) {
      double w = p.weights[j] - step * g.weights[j];
      if (shrink > 0.0) w = std::copysign(std::max(std::abs(w) - shrink, 0.0), w);
      change = std::max(change, std::abs(w - p.weights[j]));
      p.weights[j] = w;
    }
    if (change < 1e-12) break;
  }
  if (log) {
    const auto g = logreg_loss_and_gradient(x, p.weights, p.bias, l2);
    log->loss.push_back(objective(g.loss, p.weights, cfg));
  }
  return TrainedModel(ModelKind::LogReg, cfg, x.column_names(), std::move(p));
}

}  // namespace linkpred
