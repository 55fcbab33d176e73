#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "kbnn/error.hpp"

using namespace kbnn::cli;

namespace {

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--synth", d.synth, "Synthetic data: cubic, moons or circles");
  cmd->add_option("--csv", d.csv, "CSV file with a header row");
  cmd->add_option("--target", d.target, "Target column name or index (negative counts from the end)");
  cmd->add_option("--n", d.n, "Synthetic instance count");
  cmd->add_option("--noise", d.noise, "Synthetic noise standard deviation");
  cmd->add_option("--radius-factor", d.radius_factor, "Inner circle radius for circles");
  cmd->add_option("--test-fraction", d.test_fraction, "Held-out fraction");
  cmd->add_flag("--no-standardize", d.no_standardize, "Keep raw feature and target scales");
  cmd->add_flag("--classification", d.classification, "Report accuracy on 0/1 targets");
}

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  add_data_options(cmd, o.data);
  cmd->add_option("--arch", o.arch, "Layer sizes, e.g. 13,50,1")->required();
  cmd->add_option("--act", o.act, "Activations per layer, e.g. relu,linear")->required();
  cmd->add_option("--epochs", o.epochs, "Passes over the training split");
  cmd->add_flag("--no-shuffle", o.no_shuffle, "Stream instances in split order");
  cmd->add_option("--prior-var", o.prior_variance, "Prior weight variance");
  cmd->add_option("--obs-noise", o.observation_noise, "Observation noise variance on standardized targets");
  cmd->add_option("--eval-every", o.eval_every, "Evaluate every N instances");
  cmd->add_option("--checkpoints", o.checkpoints, "Instance counts at which to evaluate")->delimiter(',');
  cmd->add_option("--repeats", o.repeats, "Independent runs with seeds seed, seed+1, ...");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_flag("--no-timing", o.no_timing, "Omit wall-clock fields from reports");
  cmd->add_flag("--progress", o.progress, "Stream JSON progress records to stderr");
  cmd->add_option("--threads", o.threads, "Worker threads (default KBNN_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman Bayesian neural networks: train, evaluate and benchmark"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write the model and a report");
  add_train_options(train_cmd, train);
  train_cmd->add_option("--model-out", train.model_out, "Model file (first repeat)");
  train_cmd->add_option("--report-out", train.report_out, "Report file");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a saved model on a dataset in raw units");
  eval_cmd->add_option("--model", eval.model, "Model file")->required();
  add_data_options(eval_cmd, eval.data);
  eval_cmd->add_option("--seed", eval.seed, "Seed for synthetic data");
  eval_cmd->add_option("--report-out", eval.report_out, "Optional report file");

  PredictOptions pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predictive mean and variance for every row of a CSV");
  pred_cmd->add_option("--model", pred.model, "Model file")->required();
  pred_cmd->add_option("--input", pred.input, "CSV of features with a header row")->required();
  pred_cmd->add_option("--out", pred.out, "Output CSV (default stdout)");

  GridOptions grid;
  auto* grid_cmd = app.add_subcommand("grid", "Evaluate a 2-D model on a regular grid");
  grid_cmd->add_option("--model", grid.model, "Model file")->required();
  grid_cmd->add_option("--xmin", grid.xmin);
  grid_cmd->add_option("--xmax", grid.xmax);
  grid_cmd->add_option("--ymin", grid.ymin);
  grid_cmd->add_option("--ymax", grid.ymax);
  grid_cmd->add_option("--resolution", grid.resolution, "Points per axis");
  grid_cmd->add_option("--out", grid.out, "Output CSV (default stdout)");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Repeat training over a sweep of epochs, layers or neurons");
  add_train_options(bench_cmd, bench.train);
  bench_cmd->add_option("--sweep", bench.sweep, "epochs=1,2,5 | layers=1,2,3,4 | neurons=10,50,100,200");
  bench_cmd->add_option("--out-csv", bench.csv_out, "Results table");
  bench_cmd->add_option("--out-json", bench.json_out, "Full report");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  synth_cmd->add_option("--kind", synth.data.synth, "cubic, moons or circles")->required();
  synth_cmd->add_option("--n", synth.data.n, "Instance count");
  synth_cmd->add_option("--noise", synth.data.noise, "Noise standard deviation");
  synth_cmd->add_option("--radius-factor", synth.data.radius_factor, "Inner circle radius for circles");
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("--out", synth.out, "Output CSV")->required();

  RotatingMoonsOptions rot;
  auto* rot_cmd = app.add_subcommand("rotating-moons", "Online adaptation to a rotating moons stream");
  rot_cmd->add_option("--initial-n", rot.spec.initial_n);
  rot_cmd->add_option("--per-step-n", rot.spec.per_step_n);
  rot_cmd->add_option("--steps", rot.spec.steps);
  rot_cmd->add_option("--step-degrees", rot.spec.step_degrees);
  rot_cmd->add_option("--noise", rot.spec.noise_std);
  rot_cmd->add_option("--arch", rot.arch);
  rot_cmd->add_option("--act", rot.act);
  rot_cmd->add_option("--prior-var", rot.prior_variance);
  rot_cmd->add_option("--seed", rot.seed);
  rot_cmd->add_option("--out-dir", rot.out_dir, "Directory for accuracy.csv, grids, model and report");
  rot_cmd->add_option("--grid-min", rot.grid_min);
  rot_cmd->add_option("--grid-max", rot.grid_max);
  rot_cmd->add_option("--grid-resolution", rot.grid_resolution);
  rot_cmd->add_flag("--no-timing", rot.no_timing, "Omit wall-clock fields");
  rot_cmd->add_flag("--progress", rot.progress, "Stream JSON progress records to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*eval_cmd) return cmd_eval(eval);
    if (*pred_cmd) return cmd_predict(pred);
    if (*grid_cmd) return cmd_grid(grid);
    if (*bench_cmd) return cmd_bench(bench);
    if (*synth_cmd) return cmd_synth(synth);
    if (*rot_cmd) return cmd_rotating_moons(rot);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"event", "error"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 1;
}
