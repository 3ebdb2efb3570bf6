#pragma once

// Internal helpers shared by the classifier trainers.

#include <cmath>
#include <string_view>

#include <fmt/format.h>

#include "linkpred/dataset.hpp"
#include "linkpred/errors.hpp"

namespace linkpred::detail {

inline void require_trainable(const FeatureMatrix& x, std::string_view who) {
  if (x.empty()) throw DomainError(fmt::format("{}: empty training matrix", who));
  for (int y : x.labels()) {
    if (y != 0 && y != 1) throw DomainError(fmt::format("{}: labels must be 0 or 1, got {}", who, y));
  }
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Binary cross-entropy of a logit z against label y, stable for large |z|.
inline double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace linkpred::detail
