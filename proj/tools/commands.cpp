#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kbnn/error.hpp"
#include "kbnn/forward.hpp"
#include "kbnn/metrics.hpp"
#include "kbnn/rng.hpp"
#include "report.hpp"

namespace kbnn::cli {

namespace {

using nlohmann::json;

std::mutex g_progress_mutex;

ReportSink progress_sink(bool enabled, std::size_t job) {
  if (!enabled) return {};
  return [job](const std::string& line) {
    auto j = json::parse(line);
    j["job"] = job;
    std::lock_guard lock(g_progress_mutex);
    std::cerr << j.dump() << '\n';
  };
}

bool is_classification(const DataOptions& d) {
  return d.classification || d.synth == "moons" || d.synth == "circles";
}

Dataset generate(const DataOptions& d, std::uint64_t seed) {
  if (d.synth == "cubic") {
    CubicSpec spec;
    if (d.n) spec.n = *d.n;
    if (d.noise) spec.noise_std = *d.noise;
    return gen_cubic_data(spec, seed);
  }
  if (d.synth == "moons") return gen_moons(d.n.value_or(1500), d.noise.value_or(0.1), seed);
  if (d.synth == "circles") return gen_circles(d.n.value_or(1500), d.noise.value_or(0.1), d.radius_factor, seed);
  throw ConfigError("unknown synthetic dataset '" + d.synth + "' (expected cubic, moons or circles)");
}

Dataset load_dataset(const DataOptions& d, std::uint64_t seed) {
  if (!d.csv.empty() && !d.synth.empty()) throw ConfigError("use either --csv or --synth, not both");
  if (!d.csv.empty()) return load_csv_dataset(d.csv, d.target);
  if (!d.synth.empty()) return generate(d, seed);
  throw ConfigError("no data source: pass --csv or --synth");
}

DatasetSplit load_split(const DataOptions& d, std::uint64_t seed) {
  SplitOptions opts;
  opts.test_fraction = d.test_fraction;
  opts.classification = is_classification(d);
  opts.standardize_features = !d.no_standardize && !(opts.classification && !d.synth.empty());
  opts.standardize_targets = !d.no_standardize;
  return make_split(load_dataset(d, seed), opts, seed);
}

json data_json(const DataOptions& d) {
  json j;
  if (!d.csv.empty()) {
    j["csv"] = d.csv;
    j["target"] = d.target;
  } else {
    j["synth"] = d.synth;
    if (d.n) j["n"] = *d.n;
    if (d.noise) j["noise"] = *d.noise;
    if (d.synth == "circles") j["radius_factor"] = d.radius_factor;
  }
  j["test_fraction"] = d.test_fraction;
  j["standardize"] = !d.no_standardize;
  j["classification"] = is_classification(d);
  return j;
}

struct Model {
  std::vector<Eigen::Index> arch;
  std::vector<Activation> acts;
};

Model parse_model(const std::string& arch, const std::string& act) {
  if (arch.empty()) throw ConfigError("--arch is required");
  if (act.empty()) throw ConfigError("--act is required");
  return {parse_architecture(arch), parse_activations(act)};
}

void check_dims(const Model& m, const DatasetSplit& split) {
  if (m.arch.front() != split.input_dim()) {
    throw ConfigError("architecture input size " + std::to_string(m.arch.front()) + " does not match the data (" +
                      std::to_string(split.input_dim()) + " features)");
  }
  if (m.arch.back() != split.output_dim()) {
    throw ConfigError("architecture output size " + std::to_string(m.arch.back()) + " does not match the data (" +
                      std::to_string(split.output_dim()) + " targets)");
  }
}

TrainConfig train_config(const TrainOptions& o, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.shuffle_each_epoch = !o.no_shuffle;
  cfg.prior_variance = o.prior_variance;
  cfg.observation_noise = o.observation_noise;
  cfg.eval_every = o.eval_every;
  cfg.checkpoints = o.checkpoints;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

struct RunResult {
  NetworkState net;
  TrainReport report;
};

RunResult run_once(const TrainOptions& o, const Model& m, std::uint64_t seed, std::size_t job) {
  const DatasetSplit split = load_split(o.data, seed);
  check_dims(m, split);
  const NetworkState prior = init_network(m.arch, m.acts, PriorSpec{o.prior_variance}, seed);
  auto [net, report] = train(prior, split, train_config(o, seed), progress_sink(o.progress, job));
  return {std::move(net), std::move(report)};
}

std::vector<RunResult> run_repeats(const TrainOptions& o, const Model& m) {
  if (o.repeats < 1) throw ConfigError("--repeats must be at least 1");
  std::vector<RunResult> runs(static_cast<std::size_t>(o.repeats));
  run_pool(runs.size(), o.threads.value_or(default_threads()), [&](std::size_t r) {
    runs[r] = run_once(o, m, o.seed + r, r);
  });
  return runs;
}

json train_config_json(const TrainOptions& o) {
  json j{{"arch", o.arch},
         {"activations", o.act},
         {"epochs", o.epochs},
         {"shuffle", !o.no_shuffle},
         {"prior_variance", o.prior_variance},
         {"observation_noise", o.observation_noise},
         {"seed", o.seed},
         {"repeats", o.repeats},
         {"data", data_json(o.data)}};
  if (o.eval_every) j["eval_every"] = *o.eval_every;
  if (!o.checkpoints.empty()) j["checkpoints"] = o.checkpoints;
  return j;
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out + '\n';
}

Matrix read_feature_csv(const std::string& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open CSV file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path + ": empty file");
  if (line.ends_with('\r')) line.pop_back();
  header.clear();
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (!std::isfinite(v) || cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        const std::size_t col = row.size();
        throw LoadError(path + ": row " + std::to_string(line_no) + ", column '" +
                        (col < header.size() ? header[col] : std::to_string(col)) + "': non-numeric value '" + cell + "'");
      }
    }
    if (row.size() != header.size()) {
      throw LoadError(path + ": row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(row));
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < header.size(); ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return x;
}

std::vector<std::string> output_columns(const std::string& base, Eigen::Index e) {
  if (e == 1) return {base};
  std::vector<std::string> cols;
  for (Eigen::Index k = 1; k <= e; ++k) cols.push_back(base + "_" + std::to_string(k));
  return cols;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

std::string grid_csv(const NetworkState& net, double xmin, double xmax, double ymin, double ymax, int resolution) {
  if (net.input_dim != 2 || net.output_dim != 1) {
    throw ConfigError("grid needs a model with 2 inputs and 1 output, got " + std::to_string(net.input_dim) + " -> " +
                      std::to_string(net.output_dim));
  }
  if (resolution < 1) throw ConfigError("--resolution must be positive");
  std::string out = "x1,x2,mean,variance,pre_activation_variance\n";
  const auto xs = linspace(xmin, xmax, resolution);
  const auto ys = linspace(ymin, ymax, resolution);
  Vector x(2);
  for (double y : ys) {
    for (double xv : xs) {
      x << xv, y;
      const Prediction p = predict(net, x);
      out += join_row({format_double(xv), format_double(y), format_double(p.mean(0)), format_double(p.variance(0)),
                       format_double(p.pre_activation_variance(0))});
    }
  }
  return out;
}

EvalResult evaluate_raw(const NetworkState& net, const Dataset& data, bool classification) {
  if (data.x.cols() != net.input_dim || data.y.cols() != net.output_dim) {
    throw ConfigError("data has " + std::to_string(data.x.cols()) + " features and " + std::to_string(data.y.cols()) +
                      " targets, model is " + std::to_string(net.input_dim) + " -> " + std::to_string(net.output_dim));
  }
  const Eigen::Index e = net.output_dim;
  Vector means(data.size() * e), vars(data.size() * e), targets(data.size() * e);
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    const Prediction p = predict(net, data.x.row(r).transpose());
    means.segment(r * e, e) = p.mean;
    vars.segment(r * e, e) = p.variance;
    targets.segment(r * e, e) = data.y.row(r).transpose();
  }
  EvalResult res;
  res.n = static_cast<std::size_t>(data.size());
  res.rmse = rmse(means, targets);
  const NllResult nll = avg_nll(means, vars, targets);
  res.nll = nll.value;
  res.floored_variances = nll.floored;
  if (classification) res.accuracy = accuracy(means, targets);
  return res;
}

std::pair<std::string, std::vector<std::string>> parse_sweep(const std::string& text) {
  if (text.empty()) return {"none", {""}};
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep expects key=v1,v2,..., got '" + text + "'");
  std::string key = text.substr(0, eq);
  if (key != "epochs" && key != "layers" && key != "neurons") {
    throw ConfigError("--sweep key must be epochs, layers or neurons, got '" + key + "'");
  }
  std::vector<std::string> values;
  std::stringstream ss(text.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos || std::stol(v) < 1) {
      throw ConfigError("--sweep values must be positive integers, got '" + v + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("--sweep has no values");
  return {key, values};
}

TrainOptions apply_sweep(TrainOptions o, const std::string& key, const std::string& value) {
  if (key == "none") return o;
  const long v = std::stol(value);
  if (key == "epochs") {
    o.epochs = static_cast<int>(v);
    return o;
  }
  const auto arch = parse_architecture(o.arch);
  const auto acts = parse_activations(o.act);
  const std::string hidden_act = acts.size() > 1 ? acts.front().name() : "relu";
  const std::string out_act = acts.back().name();
  std::string new_arch = std::to_string(arch.front());
  std::string new_act;
  if (key == "layers") {
    const Eigen::Index width = arch.size() > 2 ? arch[1] : 10;
    for (long l = 0; l < v; ++l) {
      new_arch += "," + std::to_string(width);
      new_act += hidden_act + ",";
    }
  } else {
    for (std::size_t l = 1; l + 1 < arch.size(); ++l) {
      new_arch += "," + std::to_string(v);
      new_act += acts[l - 1].name() + ",";
    }
    if (arch.size() == 2) throw ConfigError("neurons sweep needs at least one hidden layer in --arch");
  }
  o.arch = new_arch + "," + std::to_string(arch.back());
  o.act = new_act + out_act;
  return o;
}

}  // namespace

int cmd_train(const TrainOptions& o) {
  const Model m = parse_model(o.arch, o.act);
  const auto runs = run_repeats(o, m);
  std::vector<TrainReport> reports;
  json per = json::array();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    reports.push_back(runs[r].report);
    json j = report_to_json(runs[r].report, !o.no_timing);
    j["repeat"] = r;
    j["seed"] = o.seed + r;
    per.push_back(std::move(j));
  }
  json report{{"format", kReportFormat},
              {"command", "train"},
              {"config", train_config_json(o)},
              {"repeats", per},
              {"summary", summary_to_json(reports, !o.no_timing)}};
  save_model(runs.front().net, o.model_out);
  write_json(o.report_out, report);
  std::cout << report["summary"].dump() << '\n';
  return 0;
}

int cmd_eval(const EvalOptions& o) {
  const NetworkState net = load_model(o.model);
  const Dataset data = load_dataset(o.data, o.seed);
  const EvalResult res = evaluate_raw(net, data, is_classification(o.data));
  json report{{"format", kReportFormat}, {"command", "eval"}, {"model", o.model}, {"data", data_json(o.data)},
              {"eval", eval_to_json(res)}};
  if (!o.report_out.empty()) write_json(o.report_out, report);
  std::cout << report["eval"].dump() << '\n';
  return 0;
}

int cmd_predict(const PredictOptions& o) {
  const NetworkState net = load_model(o.model);
  std::vector<std::string> header;
  const Matrix x = read_feature_csv(o.input, header);
  if (x.cols() != net.input_dim) {
    throw ConfigError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                      std::to_string(net.input_dim));
  }
  std::vector<std::string> cols = header;
  for (const char* base : {"mean", "variance", "pre_activation_variance"}) {
    for (auto& c : output_columns(base, net.output_dim)) cols.push_back(c);
  }
  std::string out = join_row(cols);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Prediction p = predict(net, x.row(r).transpose());
    std::vector<std::string> row;
    for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(format_double(x(r, c)));
    for (const Vector* v : {&p.mean, &p.variance, &p.pre_activation_variance})
      for (Eigen::Index k = 0; k < v->size(); ++k) row.push_back(format_double((*v)(k)));
    out += join_row(row);
  }
  if (o.out.empty()) {
    std::cout << out;
  } else {
    write_text(o.out, out);
  }
  return 0;
}

int cmd_grid(const GridOptions& o) {
  const NetworkState net = load_model(o.model);
  const std::string text = grid_csv(net, o.xmin, o.xmax, o.ymin, o.ymax, o.resolution);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return 0;
}

int cmd_bench(const BenchOptions& o) {
  const auto [key, values] = parse_sweep(o.sweep);
  if (o.train.repeats < 1) throw ConfigError("--repeats must be at least 1");
  std::vector<TrainOptions> cells;
  std::vector<Model> models;
  for (const auto& v : values) {
    cells.push_back(apply_sweep(o.train, key, v));
    models.push_back(parse_model(cells.back().arch, cells.back().act));
  }
  const auto repeats = static_cast<std::size_t>(o.train.repeats);
  std::vector<TrainReport> results(cells.size() * repeats);
  run_pool(results.size(), o.train.threads.value_or(default_threads()), [&](std::size_t job) {
    const std::size_t cell = job / repeats, r = job % repeats;
    results[job] = run_once(cells[cell], models[cell], o.train.seed + r, job).report;
  });

  const bool timing = !o.train.no_timing;
  std::vector<std::string> head{"sweep", "value", "arch", "activations", "epochs", "repeats", "rmse_mean", "rmse_std",
                                "nll_mean", "nll_std", "accuracy_mean", "accuracy_std"};
  if (timing) {
    head.push_back("train_seconds_mean");
    head.push_back("train_seconds_std");
  }
  std::string csv = join_row(head);
  json cells_json = json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<TrainReport> runs(results.begin() + static_cast<long>(c * repeats),
                                  results.begin() + static_cast<long>((c + 1) * repeats));
    const json summary = summary_to_json(runs, timing);
    auto cell = [&](const char* metric, const char* stat) -> std::string {
      const json& m = summary.at(metric);
      return m.is_null() ? "" : format_double(m.at(stat).get<double>());
    };
    std::vector<std::string> row{key, values[c], "\"" + cells[c].arch + "\"", "\"" + cells[c].act + "\"",
                                 std::to_string(cells[c].epochs), std::to_string(repeats), cell("rmse", "mean"),
                                 cell("rmse", "std"), cell("nll", "mean"), cell("nll", "std"),
                                 cell("accuracy", "mean"), cell("accuracy", "std")};
    if (timing) {
      row.push_back(cell("train_seconds", "mean"));
      row.push_back(cell("train_seconds", "std"));
    }
    csv += join_row(row);
    json per = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      json j = report_to_json(runs[r], timing);
      j["repeat"] = r;
      j["seed"] = o.train.seed + r;
      per.push_back(std::move(j));
    }
    cells_json.push_back({{"sweep", key}, {"value", values[c]}, {"arch", cells[c].arch}, {"activations", cells[c].act},
                          {"epochs", cells[c].epochs}, {"repeats", per}, {"summary", summary}});
  }
  json report{{"format", kReportFormat}, {"command", "bench"}, {"config", train_config_json(o.train)},
              {"sweep", o.sweep}, {"cells", cells_json}};
  write_text(o.csv_out, csv);
  write_json(o.json_out, report);
  std::cout << csv;
  return 0;
}

int cmd_synth(const SynthOptions& o) {
  if (o.data.synth.empty()) throw ConfigError("--kind is required");
  const Dataset data = generate(o.data, o.seed);
  if (o.out.empty()) throw ConfigError("--out is required");
  write_csv(o.out, data);
  return 0;
}

int cmd_rotating_moons(const RotatingMoonsOptions& o) {
  const auto& spec = o.spec;
  if (spec.steps < 0 || spec.per_step_n < 1) throw ConfigError("rotating moons: steps >= 0 and per-step-n >= 1 required");
  const Model m = parse_model(o.arch, o.act);
  const std::filesystem::path dir = o.out_dir;

  const Dataset initial = gen_moons(spec.initial_n, spec.noise_std, o.seed);
  const Vector centroid = initial.x.colwise().mean().transpose();
  SplitOptions split_opts;
  split_opts.classification = true;
  split_opts.standardize_features = false;
  const DatasetSplit split = make_split(initial, split_opts, o.seed);
  if (m.arch.front() != 2 || m.arch.back() != 1) throw ConfigError("rotating moons needs a 2-...-1 architecture");

  TrainConfig cfg;
  cfg.shuffle_each_epoch = false;
  cfg.seed = o.seed;
  NetworkState net = init_network(m.arch, m.acts, PriorSpec{o.prior_variance}, o.seed);
  const bool timing = !o.no_timing;

  std::string csv = timing ? "step,degrees,accuracy,nll,rmse,train_seconds\n" : "step,degrees,accuracy,nll,rmse\n";
  json steps = json::array();
  Rng step_seeds = make_stream(o.seed, "step");
  for (int step = 0; step <= spec.steps; ++step) {
    const double degrees = spec.step_degrees * step;
    DatasetSplit batch;
    if (step == 0) {
      batch = split;
    } else {
      const Dataset fresh = gen_moons(spec.per_step_n, spec.noise_std, step_seeds());
      batch.train_x = rotate_points(fresh.x, degrees, centroid);
      batch.train_y = fresh.y;
      batch.feature_stats = split.feature_stats;
      batch.target_stats = split.target_stats;
      batch.classification = true;
    }
    batch.test_x = rotate_points(split.test_x, degrees, centroid);
    batch.test_y = split.test_y;
    auto [next, report] = train(net, batch, cfg, progress_sink(o.progress, static_cast<std::size_t>(step)));
    net = std::move(next);
    const EvalResult& e = *report.final_eval;
    std::vector<std::string> row{std::to_string(step), format_double(degrees), format_double(*e.accuracy),
                                 format_double(e.nll), format_double(e.rmse)};
    if (timing) row.push_back(format_double(report.train_seconds));
    csv += join_row(row);
    json sj = report_to_json(report, timing);
    sj["step"] = step;
    sj["degrees"] = degrees;
    steps.push_back(std::move(sj));
    char name[32];
    std::snprintf(name, sizeof(name), "grid_step_%02d.csv", step);
    write_text(dir / name, grid_csv(net, o.grid_min, o.grid_max, o.grid_min, o.grid_max, o.grid_resolution));
  }
  write_text(dir / "accuracy.csv", csv);
  save_model(net, dir / "model.json");
  json report{{"format", kReportFormat},
              {"command", "rotating-moons"},
              {"config",
               {{"arch", o.arch}, {"activations", o.act}, {"initial_n", spec.initial_n}, {"per_step_n", spec.per_step_n},
                {"steps", spec.steps}, {"step_degrees", spec.step_degrees}, {"noise", spec.noise_std}, {"seed", o.seed},
                {"prior_variance", o.prior_variance}}},
              {"steps", steps}};
  write_json(dir / "report.json", report);
  std::cout << csv;
  return 0;
}

}  // namespace kbnn::cli
