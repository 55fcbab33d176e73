#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kbnn/backward.hpp"
#include "kbnn/datasets.hpp"
#include "kbnn/metrics.hpp"

namespace kbnn {

struct TrainConfig {
  int epochs = 1;
  bool shuffle_each_epoch = true;
  /// Prior weight variance, used by callers that build the network.
  double prior_variance = 1.0;
  /// Observation noise R on every output (model scale); 0 means exact targets.
  double observation_noise = 0.0;
  /// Evaluate on the test split every this many instances.
  std::optional<std::size_t> eval_every;
  /// Additional instance counts at which to evaluate.
  std::vector<std::size_t> checkpoints;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Checkpoint {
  std::size_t instances = 0;
  int epoch = 0;
  double train_seconds = 0.0;
  EvalResult eval;
};

struct TrainReport {
  std::vector<Checkpoint> checkpoints;
  std::optional<EvalResult> final_eval;
  double train_seconds = 0.0;
  std::size_t instances_processed = 0;
  std::size_t failed_updates = 0;
  std::vector<std::string> errors;

  double mean_update_ms() const;
};

/// Receives one JSON object per line: checkpoints, failed updates and the
/// final summary.
using ReportSink = std::function<void(const std::string&)>;

/// One forward + backward step in model coordinates. Throws NumericError on
/// failure; `net` itself is never modified.
NetworkState update_one_standardized(const NetworkState& net, const Vector& x, const Vector& y,
                                     const BackwardOptions& options = {});

/// update_one_standardized on raw values, mapped through the network's standardizer.
NetworkState update_one(const NetworkState& net, const Vector& x, const Vector& y,
                        const BackwardOptions& options = {});

/// Sequential training over split.train_*. The split's stats become the
/// network's standardizer. Failed updates are skipped and counted.
std::pair<NetworkState, TrainReport> train(const NetworkState& net, const DatasetSplit& split,
                                           const TrainConfig& cfg, const ReportSink& sink = {});

std::string checkpoint_json(const Checkpoint& c);

}  // namespace kbnn
