#include "kbnn/metrics.hpp"

#include <cmath>
#include <numbers>

#include "kbnn/error.hpp"
#include "kbnn/forward.hpp"

namespace kbnn {

namespace {

void check_lengths(const char* what, Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": lengths differ (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
  if (a < 1) throw DimensionError(std::string(what) + ": needs at least one entry");
}

}  // namespace

double rmse(const Vector& preds, const Vector& targets) {
  check_lengths("rmse", preds.size(), targets.size());
  return std::sqrt((preds - targets).squaredNorm() / static_cast<double>(preds.size()));
}

NllResult avg_nll(const Vector& means, const Vector& variances, const Vector& targets) {
  check_lengths("avg_nll", means.size(), targets.size());
  check_lengths("avg_nll", variances.size(), targets.size());
  NllResult out;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    double v = variances(i);
    if (!(v >= kVarianceFloor)) {
      v = kVarianceFloor;
      ++out.floored;
    }
    const double r = targets(i) - means(i);
    sum += r * r / v + std::log(v);
  }
  out.value = sum / (2.0 * static_cast<double>(means.size())) + 0.5 * std::log(2.0 * std::numbers::pi);
  return out;
}

double accuracy(const Vector& means, const Vector& labels, double threshold) {
  check_lengths("accuracy", means.size(), labels.size());
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const bool predicted = means(i) >= threshold;
    const bool actual = labels(i) >= 0.5;
    hits += predicted == actual ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(means.size());
}

EvalResult evaluate(const NetworkState& net, const Matrix& x, const Matrix& y, const AffineStats& target_stats,
                    bool classification) {
  if (x.rows() != y.rows()) throw DimensionError("evaluate: x and y row counts differ");
  const Eigen::Index rows = x.rows();
  const Eigen::Index e = y.cols();
  Vector means(rows * e), vars(rows * e), targets(rows * e);
  const Vector var_scale = target_stats.std.cwiseAbs2();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Prediction p = forward_standardized(net, x.row(r).transpose()).first;
    means.segment(r * e, e) = target_stats.destandardize(p.mean);
    vars.segment(r * e, e) = p.variance.cwiseProduct(var_scale);
    targets.segment(r * e, e) = target_stats.destandardize(y.row(r).transpose());
  }
  EvalResult out;
  out.n = static_cast<std::size_t>(rows);
  if (rows == 0) return out;
  out.rmse = rmse(means, targets);
  const NllResult nll = avg_nll(means, vars, targets);
  out.nll = nll.value;
  out.floored_variances = nll.floored;
  if (classification) out.accuracy = accuracy(means, targets);
  return out;
}

}  // namespace kbnn
