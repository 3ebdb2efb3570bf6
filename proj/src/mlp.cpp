#include <algorithm>
#include <cmath>
#include <numeric>

#include "linkpred/classifiers.hpp"
#include "linkpred/random.hpp"
#include "model_common.hpp"

namespace linkpred {

MlpParams mlp_init(std::size_t inputs, std::span<const std::size_t> hidden, std::uint64_t seed) {
  Rng rng(seed);
  MlpParams p;
  std::size_t fan_in = inputs;
  std::vector<std::size_t> widths(hidden.begin(), hidden.end());
  widths.push_back(1);
  for (std::size_t fan_out : widths) {
    if (fan_out == 0) throw DomainError("train_mlp: hidden layer of width 0");
    DenseLayer layer;
    layer.inputs = fan_in;
    layer.outputs = fan_out;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    layer.weights.resize(fan_in * fan_out);
    for (double& w : layer.weights) w = (2.0 * uniform01(rng) - 1.0) * limit;
    layer.bias.assign(fan_out, 0.0);
    p.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return p;
}

namespace {

/// Activations of every layer for one input; the last entry holds the logit.
void forward_all(const MlpParams& p, std::span<const double> input,
                 std::vector<std::vector<double>>& acts) {
  acts.resize(p.layers.size() + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    auto& out = acts[l + 1];
    out.assign(layer.outputs, 0.0);
    const bool hidden = l + 1 < p.layers.size();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      double z = layer.bias[o];
      const double* w = layer.weights.data() + o * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) z += w[i] * acts[l][i];
      out[o] = hidden ? std::max(z, 0.0) : z;
    }
  }
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams z = p;
  for (auto& layer : z.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return z;
}

}  // namespace

double mlp_forward(const MlpParams& params, std::span<const double> input) {
  std::vector<std::vector<double>> acts;
  forward_all(params, input, acts);
  return detail::sigmoid(acts.back()[0]);
}

std::pair<double, MlpParams> mlp_loss_and_gradient(const MlpParams& params, const FeatureMatrix& x,
                                                   std::span<const std::size_t> rows) {
  MlpParams grad = zeros_like(params);
  if (rows.empty()) return {0.0, grad};
  const double inv = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  for (std::size_t r : rows) {
    forward_all(params, x.row(r), acts);
    const double z = acts.back()[0];
    const double y = x.labels()[r];
    loss += detail::bce_from_logit(z, y);
    delta.assign(1, (detail::sigmoid(z) - y) * inv);
    for (std::size_t l = params.layers.size(); l-- > 0;) {
      const auto& layer = params.layers[l];
      auto& g = grad.layers[l];
      const auto& in = acts[l];
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        g.bias[o] += delta[o];
        double* gw = g.weights.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) gw[i] += delta[o] * in[i];
      }
      if (l == 0) break;
      prev_delta.assign(layer.inputs, 0.0);
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* w = layer.weights.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) prev_delta[i] += w[i] * delta[o];
      }
      // ReLU derivative; acts[l] is the post-activation of layer l-1
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        if (in[i] <= 0.0) prev_delta[i] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }
  return {loss * inv, grad};
}

namespace {

struct Adam {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;

  MlpParams m, v;
  std::size_t t = 0;

  explicit Adam(const MlpParams& p) : m(zeros_like(p)), v(zeros_like(p)) {}

  void step(MlpParams& p, const MlpParams& g, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    auto update = [&](std::vector<double>& w, const std::vector<double>& gw,
                      std::vector<double>& mw, std::vector<double>& vw) {
      for (std::size_t k = 0; k < w.size(); ++k) {
        mw[k] = beta1 * mw[k] + (1 - beta1) * gw[k];
        vw[k] = beta2 * vw[k] + (1 - beta2) * gw[k] * gw[k];
        w[k] -= lr * (mw[k] / c1) / (std::sqrt(vw[k] / c2) + eps);
      }
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      update(p.layers[l].weights, g.layers[l].weights, m.layers[l].weights, v.layers[l].weights);
      update(p.layers[l].bias, g.layers[l].bias, m.layers[l].bias, v.layers[l].bias);
    }
  }
};

}  // namespace

TrainedModel train_mlp(const FeatureMatrix& x, const ModelConfig& cfg, TrainingLog* log) {
  detail::require_trainable(x, "train_mlp");
  if (cfg.batch_size == 0) throw DomainError("train_mlp: batch_size must be >= 1");
  MlpParams params = mlp_init(x.cols(), cfg.hidden_layers, derive_seed(cfg.seed, "mlp-init"));
  Adam adam(params);
  Rng rng(derive_seed(cfg.seed, "mlp-batches"));

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  const std::vector<std::size_t> all = order;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.batch_size < order.size()) shuffle(order, rng);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      const auto [loss, grad] =
          mlp_loss_and_gradient(params, x, std::span(order).subspan(b, e - b));
      if (!std::isfinite(loss)) {
        throw DivergenceError("train_mlp: loss became non-finite; use a smaller learning rate");
      }
      adam.step(params, grad, cfg.learning_rate);
    }
    if (log) log->loss.push_back(mlp_loss_and_gradient(params, x, all).first);
  }
  return TrainedModel(ModelKind::Mlp, cfg, x.column_names(), std::move(params));
}

}  // namespace linkpred
