#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <random>

#include "kbnn/error.hpp"
#include "kbnn/trainer.hpp"
#include "oracles.hpp"

using namespace kbnn;

namespace {

DatasetSplit moons_split(Eigen::Index n, std::uint64_t seed) {
  SplitOptions opts;
  opts.classification = true;
  opts.standardize_features = false;
  return make_split(gen_moons(n, 0.1, seed), opts, seed);
}

}  // namespace

TEST_CASE("repeated updates converge to the interpolant") {
  NetworkState net;
  net.input_dim = 2;
  net.output_dim = 1;
  net.layers.push_back(LayerState{{NeuronPosterior{Vector::Zero(3), Matrix::Identity(3, 3)}}, Activation::linear(), 2});
  Vector x(2), y(1);
  x << 0.5, -1.0;
  y << 2.0;
  Vector h(3);
  h << 1.0, x;
  const Vector least_norm = h * (y(0) / h.squaredNorm());
  for (int i = 0; i < 5; ++i) net = update_one(net, x, y);
  CHECK(oracle::max_abs(net.layers[0].neurons[0].mean, least_norm) <= 1e-10);
}

TEST_CASE("update_one applies the standardizer") {
  auto net = init_network({1, 3, 1}, parse_activations("relu,linear"), {}, 1);
  Standardizer s{{Vector::Constant(1, 5.0), Vector::Constant(1, 2.0)}, {Vector::Constant(1, -1.0), Vector::Constant(1, 3.0)}};
  auto with = net;
  with.standardizer = s;
  Vector x(1), y(1);
  x << 6.0;
  y << 2.0;
  const auto a = update_one(with, x, y);
  const auto b = update_one_standardized(net, s.features.standardize(x), s.targets.standardize(y));
  CHECK(a.layers == b.layers);
  CHECK_THROWS_AS(update_one(with, Vector::Zero(2), y), DimensionError);
}

TEST_CASE("online training equals folding update_one") {
  const auto split = moons_split(120, 3);
  const auto net = init_network({2, 5, 1}, parse_activations("relu,sigmoid"), {}, 3);
  TrainConfig cfg;
  cfg.shuffle_each_epoch = false;
  const auto [trained, report] = train(net, split, cfg);
  NetworkState folded = net;
  for (Eigen::Index i = 0; i < split.train_x.rows(); ++i) {
    folded = update_one_standardized(folded, split.train_x.row(i).transpose(), split.train_y.row(i).transpose());
  }
  CHECK(trained.layers == folded.layers);
  CHECK(report.instances_processed == static_cast<std::size_t>(split.train_x.rows()));
  CHECK(report.failed_updates == 0);
}

TEST_CASE("training is deterministic") {
  const auto split = moons_split(200, 4);
  const auto net = init_network({2, 6, 1}, parse_activations("relu,sigmoid"), {}, 4);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 11;
  const auto a = train(net, split, cfg).first;
  const auto b = train(net, split, cfg).first;
  CHECK(a == b);
  cfg.seed = 12;
  CHECK_FALSE(train(net, split, cfg).first == a);
}

TEST_CASE("checkpoints and report sink") {
  const auto split = moons_split(300, 5);
  const auto net = init_network({2, 10, 10, 1}, parse_activations("relu,relu,sigmoid"), {}, 5);
  TrainConfig cfg;
  cfg.shuffle_each_epoch = false;
  cfg.checkpoints = {5, 50, 270};
  cfg.eval_every = 100;
  std::vector<std::string> lines;
  const auto [trained, report] = train(net, split, cfg, [&](const std::string& l) { lines.push_back(l); });
  REQUIRE(report.checkpoints.size() == 5);
  std::vector<std::size_t> at;
  for (const auto& c : report.checkpoints) at.push_back(c.instances);
  CHECK(at == std::vector<std::size_t>{5, 50, 100, 200, 270});
  for (std::size_t i = 1; i < report.checkpoints.size(); ++i) {
    CHECK(report.checkpoints[i].train_seconds >= report.checkpoints[i - 1].train_seconds);
  }
  CHECK(report.final_eval.has_value());
  CHECK(report.final_eval->accuracy.has_value());
  CHECK(lines.size() == 6);
  CHECK(lines.back().find("\"done\"") != std::string::npos);
  CHECK(trained.standardizer.has_value());
}

TEST_CASE("empty dataset and invalid config") {
  const auto net = init_network({2, 3, 1}, parse_activations("relu,linear"), {}, 0);
  DatasetSplit empty;
  empty.train_x = Matrix(0, 2);
  empty.train_y = Matrix(0, 1);
  const auto [same, report] = train(net, empty, {});
  CHECK(same == net);
  CHECK(report.instances_processed == 0);
  CHECK(report.checkpoints.empty());
  TrainConfig bad;
  bad.epochs = 0;
  CHECK_THROWS_AS(train(net, empty, bad), ConfigError);
  const auto wrong = moons_split(50, 1);
  const auto net3 = init_network({3, 3, 1}, parse_activations("relu,linear"), {}, 0);
  CHECK_THROWS_AS(train(net3, wrong, {}), DimensionError);
}

TEST_CASE("failed updates are skipped and counted") {
  auto split = moons_split(60, 6);
  split.train_x(3, 0) = std::numeric_limits<double>::infinity();
  const auto net = init_network({2, 4, 1}, parse_activations("relu,sigmoid"), {}, 6);
  TrainConfig cfg;
  cfg.shuffle_each_epoch = false;
  std::size_t failures = 0;
  const auto [trained, report] = train(net, split, cfg, [&](const std::string& l) {
    if (l.find("\"event\":\"failed_update\"") != std::string::npos) ++failures;
  });
  CHECK(report.failed_updates == 1);
  CHECK(failures == 1);
  CHECK(report.errors.size() == 1);
  for (const auto& layer : trained.layers)
    for (const auto& n : layer.neurons) CHECK(n.mean.allFinite());
}

TEST_CASE("more epochs lower the regression error on average") {
  double one = 0.0, ten = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CubicSpec spec;
    spec.n = 300;
    spec.noise_std = 0.5;
    const auto split = gen_cubic(spec, seed);
    const auto net = init_network({1, 20, 1}, parse_activations("relu,linear"), {}, seed);
    TrainConfig cfg;
    cfg.seed = seed;
    one += train(net, split, cfg).second.final_eval->rmse;
    cfg.epochs = 10;
    ten += train(net, split, cfg).second.final_eval->rmse;
  }
  CHECK(ten < one);
}

TEST_CASE("training time grows about linearly") {
  const auto net = init_network({2, 20, 1}, parse_activations("relu,sigmoid"), {}, 1);
  const auto small_split = moons_split(1000, 2);
  const auto large_split = moons_split(2000, 2);
  TrainConfig cfg;
  double small = 1e9, large = 1e9;
  for (int rep = 0; rep < 5; ++rep) {
    small = std::min(small, train(net, small_split, cfg).second.train_seconds / 900.0);
    large = std::min(large, train(net, large_split, cfg).second.train_seconds / 1800.0);
  }
  CHECK(large <= 1.2 * small);
}
