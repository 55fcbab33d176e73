#include "kbnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include <nlohmann/json.hpp>

#include "kbnn/error.hpp"
#include "kbnn/forward.hpp"
#include "kbnn/rng.hpp"

namespace kbnn {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(prior_variance > 0.0)) throw ConfigError("prior variance must be positive");
  if (!(observation_noise >= 0.0)) throw ConfigError("observation noise must be non-negative");
  if (eval_every && *eval_every == 0) throw ConfigError("eval_every must be positive");
}

double TrainReport::mean_update_ms() const {
  if (instances_processed == 0) return 0.0;
  return 1e3 * train_seconds / static_cast<double>(instances_processed);
}

NetworkState update_one_standardized(const NetworkState& net, const Vector& x, const Vector& y,
                                     const BackwardOptions& options) {
  if (y.size() != net.output_dim) {
    throw DimensionError("update_one: target has " + std::to_string(y.size()) + " entries, network outputs " +
                         std::to_string(net.output_dim));
  }
  const auto cache = forward_standardized(net, x).second;
  return backward(net, cache, y, options);
}

NetworkState update_one(const NetworkState& net, const Vector& x, const Vector& y,
                        const BackwardOptions& options) {
  if (!net.standardizer) return update_one_standardized(net, x, y, options);
  const auto& s = *net.standardizer;
  if (x.size() != s.features.mean.size() || y.size() != s.targets.mean.size()) {
    throw DimensionError("update_one: input or target size does not match the standardizer");
  }
  return update_one_standardized(net, s.features.standardize(x), s.targets.standardize(y), options);
}

namespace {

nlohmann::json eval_json(const EvalResult& e) {
  nlohmann::json j{{"rmse", e.rmse}, {"nll", e.nll}, {"n", e.n}};
  j["accuracy"] = e.accuracy ? nlohmann::json(*e.accuracy) : nlohmann::json(nullptr);
  if (e.floored_variances > 0) j["floored_variances"] = e.floored_variances;
  return j;
}

}  // namespace

std::string checkpoint_json(const Checkpoint& c) {
  nlohmann::json j = eval_json(c.eval);
  j["event"] = "checkpoint";
  j["instances"] = c.instances;
  j["epoch"] = c.epoch;
  j["train_seconds"] = c.train_seconds;
  return j.dump();
}

std::pair<NetworkState, TrainReport> train(const NetworkState& net, const DatasetSplit& split,
                                           const TrainConfig& cfg, const ReportSink& sink) {
  cfg.validate();
  if (split.train_x.rows() != split.train_y.rows()) throw DimensionError("train: x and y row counts differ");
  NetworkState state = net;
  TrainReport report;
  const Eigen::Index n = split.train_x.rows();
  if (n == 0) return {std::move(state), std::move(report)};
  if (split.input_dim() != net.input_dim || split.output_dim() != net.output_dim) {
    throw DimensionError("train: data has " + std::to_string(split.input_dim()) + " features and " +
                         std::to_string(split.output_dim()) + " targets, network is " +
                         std::to_string(net.input_dim) + " -> " + std::to_string(net.output_dim));
  }
  state.standardizer = split.standardizer();

  BackwardOptions options;
  if (cfg.observation_noise > 0.0) options.observation_noise = Vector::Constant(net.output_dim, cfg.observation_noise);

  std::vector<std::size_t> marks = cfg.checkpoints;
  std::sort(marks.begin(), marks.end());
  const bool can_eval = split.test_x.rows() > 0;
  auto emit_checkpoint = [&](int epoch) {
    if (!can_eval) return;
    Checkpoint c{report.instances_processed, epoch, report.train_seconds,
                 evaluate(state, split.test_x, split.test_y, split.target_stats, split.classification)};
    if (sink) sink(checkpoint_json(c));
    report.checkpoints.push_back(std::move(c));
  };

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng = make_stream(cfg.seed, "shuffle");
  using clock = std::chrono::steady_clock;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) std::shuffle(order.begin(), order.end(), rng);
    for (const Eigen::Index i : order) {
      const auto t0 = clock::now();
      try {
        state = update_one_standardized(state, split.train_x.row(i).transpose(), split.train_y.row(i).transpose(),
                                        options);
      } catch (const NumericError& e) {
        ++report.failed_updates;
        std::string msg = "instance " + std::to_string(i) + ": " + e.what();
        if (sink) sink(nlohmann::json{{"event", "failed_update"}, {"instance", i}, {"error", e.what()}}.dump());
        report.errors.push_back(std::move(msg));
      }
      report.train_seconds += std::chrono::duration<double>(clock::now() - t0).count();
      ++report.instances_processed;
      const std::size_t done = report.instances_processed;
      const bool periodic = cfg.eval_every && done % *cfg.eval_every == 0;
      if (periodic || std::binary_search(marks.begin(), marks.end(), done)) emit_checkpoint(epoch);
    }
  }

  if (can_eval) report.final_eval = evaluate(state, split.test_x, split.test_y, split.target_stats, split.classification);
  if (sink) {
    nlohmann::json j{{"event", "done"},
                     {"instances", report.instances_processed},
                     {"failed_updates", report.failed_updates},
                     {"train_seconds", report.train_seconds}};
    if (report.final_eval) j["eval"] = eval_json(*report.final_eval);
    sink(j.dump());
  }
  return {std::move(state), std::move(report)};
}

}  // namespace kbnn
