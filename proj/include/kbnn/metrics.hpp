#pragma once

#include <cstddef>
#include <optional>

#include "kbnn/network.hpp"

namespace kbnn {

/// sqrt(mean squared residual). Throws DimensionError on empty or mismatched input.
double rmse(const Vector& preds, const Vector& targets);

struct NllResult {
  double value = 0.0;
  /// Variances raised to kVarianceFloor before evaluation.
  std::size_t floored = 0;
};

/// Average Gaussian negative log-likelihood in nats:
/// (1/2N) sum[(y - mu)^2 / var + log var] + log(2 pi) / 2.
NllResult avg_nll(const Vector& means, const Vector& variances, const Vector& targets);

/// Fraction of predictions with (mean >= threshold) == label. Ties go to class 1.
double accuracy(const Vector& means, const Vector& labels, double threshold = 0.5);

struct EvalResult {
  double rmse = 0.0;
  double nll = 0.0;
  std::optional<double> accuracy;
  std::size_t n = 0;
  std::size_t floored_variances = 0;
};

/// Scores a network on standardized inputs/targets. Predictions and targets
/// are mapped to raw units with `target_stats` first; variances scale by std^2.
/// All outputs are flattened into one vector.
EvalResult evaluate(const NetworkState& net, const Matrix& x, const Matrix& y, const AffineStats& target_stats,
                    bool classification);

}  // namespace kbnn
