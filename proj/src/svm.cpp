#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "linkpred/classifiers.hpp"
#include "model_common.hpp"

namespace linkpred {

double kernel_value(const SvmParams& p, std::span<const double> a, std::span<const double> b) {
  switch (p.kernel) {
    case Kernel::Linear: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    }
    case Kernel::Gaussian: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
      }
      return std::exp(-p.gamma * s);
    }
    case Kernel::Polynomial: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return std::pow(p.gamma * s + p.coef0, p.degree);
    }
  }
  return 0.0;
}

namespace {

constexpr double kTau = 1e-12;

/// Rows of Q_ij = y_i y_j K(x_i, x_j), computed on demand and kept while the
/// cache budget allows.
class KernelRows {
 public:
  KernelRows(const FeatureMatrix& x, const std::vector<double>& y, const SvmParams& p)
      : x_(x), y_(y), p_(p), rows_(x.rows()) {
    const std::size_t n = x.rows();
    max_cached_ = std::max<std::size_t>(2, kBudgetBytes / (sizeof(double) * std::max<std::size_t>(n, 1)));
    diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) diag_[i] = kernel_value(p, x.row(i), x.row(i));
  }

  const std::vector<double>& row(std::size_t i) {
    if (!rows_[i].empty()) return rows_[i];
    std::vector<double>* target = &scratch_[next_scratch_ ^= 1];
    if (cached_ < max_cached_) {
      target = &rows_[i];
      ++cached_;
    }
    const std::size_t n = x_.rows();
    target->resize(n);
    const auto xi = x_.row(i);
    for (std::size_t j = 0; j < n; ++j) (*target)[j] = y_[i] * y_[j] * kernel_value(p_, xi, x_.row(j));
    return *target;
  }

  double diag(std::size_t i) const { return diag_[i]; }

 private:
  static constexpr std::size_t kBudgetBytes = std::size_t(1) << 30;
  const FeatureMatrix& x_;
  const std::vector<double>& y_;
  const SvmParams& p_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> scratch_[2];
  int next_scratch_ = 0;
  std::vector<double> diag_;
  std::size_t cached_ = 0;
  std::size_t max_cached_ = 0;
};

double auto_gamma(const FeatureMatrix& x) {
  const auto& v = x.values();
  double mean = 0.0;
  for (double t : v) mean += t;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double t : v) var += (t - mean) * (t - mean);
  var /= static_cast<double>(v.size());
  const double d = static_cast<double>(x.cols());
  return var > 0 ? 1.0 / (d * var) : 1.0 / d;
}

}  // namespace

// Dual soft-margin SVM by SMO with second-order working-set selection:
//   min 1/2 a^T Q a - e^T a   s.t. 0 <= a_i <= C, y^T a = 0.
TrainedModel train_svm(const FeatureMatrix& x, const ModelConfig& cfg) {
  detail::require_trainable(x, "train_svm");
  if (!(cfg.svm_c > 0)) throw DomainError("train_svm: C must be > 0");
  const std::size_t n = x.rows();
  const double c = cfg.svm_c;

  SvmParams p;
  p.kernel = cfg.kernel;
  p.gamma = cfg.kernel_gamma.value_or(auto_gamma(x));
  p.coef0 = cfg.poly_coef0;
  p.degree = cfg.poly_degree;
  p.dims = x.cols();

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x.labels()[i] == 1 ? 1.0 : -1.0;

  KernelRows q(x, y, p);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto at_upper = [&](std::size_t i) { return alpha[i] >= c; };
  auto at_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

  const std::size_t max_iter =
      cfg.max_iterations ? cfg.max_iterations : std::max<std::size_t>(10'000'000, 100 * n);
  double gap = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (;; ++iter) {
    // i: maximal violator in I_up
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gi = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? !at_upper(t) : !at_lower(t)) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          gi = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    // j: best second-order decrease in I_low
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gj = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    const std::vector<double>* qi = gi >= 0 ? &q.row(static_cast<std::size_t>(gi)) : nullptr;
    for (std::size_t t = 0; t < n && qi; ++t) {
      if (y[t] > 0 ? !at_lower(t) : !at_upper(t)) {
        const double v = y[t] * grad[t];
        gmax2 = std::max(gmax2, v);
        const double diff = gmax + v;
        if (diff > 0) {
          const auto i = static_cast<std::size_t>(gi);
          // (*qi)[t] = y_i y_t K_it, so this is K_ii + K_tt - 2 K_it
          const double quad = q.diag(i) + q.diag(t) - 2.0 * y[i] * y[t] * (*qi)[t];
          const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
          if (obj <= best_obj) {
            best_obj = obj;
            gj = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    gap = gmax + gmax2;
    if (gi < 0 || gj < 0 || gap < cfg.tolerance) break;
    if (iter >= max_iter) {
      throw ConvergenceError(
          fmt::format("train_svm: SMO did not converge in {} iterations (gap {:.3g})", max_iter,
                      gap),
          gap);
    }

    const auto i = static_cast<std::size_t>(gi);
    const auto j = static_cast<std::size_t>(gj);
    const std::vector<double>& row_i = q.row(i);
    const std::vector<double> row_j = q.row(j);
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = q.diag(i) + q.diag(j) + 2.0 * row_i[j];
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q.diag(i) + q.diag(j) - 2.0 * row_i[j];
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    const std::vector<double>& ri = q.row(i);
    for (std::size_t t = 0; t < n; ++t) grad[t] += ri[t] * di + row_j[t] * dj;
  }

  // bias from free vectors, or the midpoint of the feasible interval
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
  p.bias = -rho;

  double half_quad = 0.0;
  double linear = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    half_quad += 0.5 * alpha[t] * (grad[t] + 1.0);
    linear += alpha[t];
  }
  p.dual_objective = linear - half_quad;

  if (p.kernel == Kernel::Linear) p.primal_weights.assign(p.dims, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0) continue;
    const auto row = x.row(t);
    p.support.insert(p.support.end(), row.begin(), row.end());
    p.coef.push_back(alpha[t] * y[t]);
    if (p.kernel == Kernel::Linear) {
      for (std::size_t k = 0; k < p.dims; ++k) p.primal_weights[k] += alpha[t] * y[t] * row[k];
    }
  }
  p.alpha = std::move(alpha);
  return TrainedModel(ModelKind::Svm, cfg, x.column_names(), std::move(p));
}

}  // namespace linkpred
