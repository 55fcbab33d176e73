#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kbnn/datasets.hpp"
#include "kbnn/trainer.hpp"

namespace kbnn::cli {

/// Where instances come from: a synthetic generator or a CSV file.
struct DataOptions {
  std::string synth;  ///< cubic, moons or circles
  std::string csv;
  std::string target = "-1";
  std::optional<long> n;
  std::optional<double> noise;
  double radius_factor = 0.8;
  double test_fraction = 0.1;
  bool no_standardize = false;
  bool classification = false;
};

struct TrainOptions {
  DataOptions data;
  std::string arch;
  std::string act;
  int epochs = 1;
  bool no_shuffle = false;
  double prior_variance = 1.0;
  double observation_noise = 0.0;
  std::optional<std::size_t> eval_every;
  std::vector<std::size_t> checkpoints;
  int repeats = 1;
  std::uint64_t seed = 0;
  std::string model_out = "kbnn-model.json";
  std::string report_out = "kbnn-report.json";
  bool no_timing = false;
  bool progress = false;
  std::optional<std::size_t> threads;
};

struct EvalOptions {
  std::string model;
  DataOptions data;
  std::uint64_t seed = 0;
  std::string report_out;
};

struct PredictOptions {
  std::string model;
  std::string input;
  std::string out;
};

struct GridOptions {
  std::string model;
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  int resolution = 50;
  std::string out;
};

struct BenchOptions {
  TrainOptions train;
  std::string sweep;
  std::string csv_out = "kbnn-bench.csv";
  std::string json_out = "kbnn-bench.json";
};

struct SynthOptions {
  DataOptions data;
  std::uint64_t seed = 0;
  std::string out;
};

struct RotatingMoonsOptions {
  RotatingMoonsSpec spec;
  std::string arch = "2,10,10,1";
  std::string act = "relu,relu,sigmoid";
  double prior_variance = 1.0;
  std::uint64_t seed = 0;
  std::string out_dir = "rotating-moons";
  double grid_min = -3.0;
  double grid_max = 4.0;
  int grid_resolution = 50;
  bool no_timing = false;
  bool progress = false;
};

int cmd_train(const TrainOptions& o);
int cmd_eval(const EvalOptions& o);
int cmd_predict(const PredictOptions& o);
int cmd_grid(const GridOptions& o);
int cmd_bench(const BenchOptions& o);
int cmd_synth(const SynthOptions& o);
int cmd_rotating_moons(const RotatingMoonsOptions& o);

}  // namespace kbnn::cli
