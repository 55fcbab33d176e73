#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kbnn/backward.hpp"
#include "kbnn/datasets.hpp"
#include "kbnn/error.hpp"
#include "kbnn/metrics.hpp"
#include "kbnn/trainer.hpp"

namespace py = pybind11;
using namespace kbnn;

namespace {

py::dict eval_dict(const EvalResult& e) {
  py::dict d;
  d["rmse"] = e.rmse;
  d["nll"] = e.nll;
  d["accuracy"] = e.accuracy ? py::cast(*e.accuracy) : py::none();
  d["n"] = e.n;
  d["floored_variances"] = e.floored_variances;
  return d;
}

py::dict report_dict(const TrainReport& r) {
  py::list checkpoints;
  for (const auto& c : r.checkpoints) {
    py::dict d;
    d["instances"] = c.instances;
    d["epoch"] = c.epoch;
    d["train_seconds"] = c.train_seconds;
    d["eval"] = eval_dict(c.eval);
    checkpoints.append(d);
  }
  py::dict d;
  d["checkpoints"] = checkpoints;
  d["final_eval"] = r.final_eval ? py::object(eval_dict(*r.final_eval)) : py::none();
  d["train_seconds"] = r.train_seconds;
  d["instances_processed"] = r.instances_processed;
  d["failed_updates"] = r.failed_updates;
  d["errors"] = r.errors;
  return d;
}

std::vector<Activation> activations_from(const std::vector<std::string>& names) {
  std::vector<Activation> out;
  for (const auto& n : names) out.push_back(Activation::parse(n));
  return out;
}

// Row-wise predictions: columns are outputs.
py::tuple predict_rows(const NetworkState& net, const Matrix& x) {
  const Eigen::Index n = x.rows(), k = net.output_dim;
  Matrix mean(n, k), var(n, k), pre_mean(n, k), pre_var(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Prediction p = predict(net, x.row(i).transpose());
    mean.row(i) = p.mean.transpose();
    var.row(i) = p.variance.transpose();
    pre_mean.row(i) = p.pre_activation_mean.transpose();
    pre_var.row(i) = p.pre_activation_variance.transpose();
  }
  return py::make_tuple(mean, var, pre_mean, pre_var);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kalman Bayesian neural networks: closed-form moment propagation and online weight smoothing.";

  auto base = py::register_exception<Error>(m, "KbnnError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<SingularMatrixError>(m, "SingularMatrixError", numeric.ptr());
  py::register_exception<LoadError>(m, "LoadError", base.ptr());

  m.def(
      "propagate",
      [](const std::string& activation, double mean, double variance) {
        const auto r = propagate(Activation::parse(activation), {mean, variance});
        return py::make_tuple(r.mean_z, r.var_z, r.cov_az);
      },
      py::arg("activation"), py::arg("mean"), py::arg("variance"),
      "Returns (E[f(a)], Var[f(a)], Cov[a, f(a)]) for a ~ N(mean, variance).");

  py::class_<NetworkState>(m, "Network")
      .def_static(
          "create",
          [](const std::vector<Eigen::Index>& arch, const std::vector<std::string>& activations,
             double prior_variance, std::uint64_t seed) {
            return init_network(arch, activations_from(activations), PriorSpec{prior_variance}, seed);
          },
          py::arg("arch"), py::arg("activations"), py::arg("prior_variance") = 1.0, py::arg("seed") = 0)
      .def_static("load", &load_model, py::arg("path"))
      .def_static("from_json", &from_json_string, py::arg("text"))
      .def("save", [](const NetworkState& n, const std::filesystem::path& p) { save_model(n, p); }, py::arg("path"))
      .def("to_json", [](const NetworkState& n) { return to_json_string(n); })
      .def_property_readonly("architecture", &NetworkState::architecture)
      .def_property_readonly("activations",
                             [](const NetworkState& n) {
                               std::vector<std::string> out;
                               for (const auto& l : n.layers) out.push_back(l.activation.name());
                               return out;
                             })
      .def_property_readonly("input_dim", [](const NetworkState& n) { return n.input_dim; })
      .def_property_readonly("output_dim", [](const NetworkState& n) { return n.output_dim; })
      .def_property_readonly("parameter_count", [](const NetworkState& n) { return parameter_count(n); })
      .def(
          "neuron",
          [](const NetworkState& n, std::size_t layer, std::size_t index) {
            const auto& p = n.layers.at(layer).neurons.at(index);
            return py::make_tuple(p.mean, p.covariance);
          },
          py::arg("layer"), py::arg("index"), "(mean, covariance) of one neuron's weights, bias first.")
      .def(
          "predict",
          [](const NetworkState& n, const Vector& x) {
            const Prediction p = predict(n, x);
            return py::make_tuple(p.mean, p.variance, p.pre_activation_mean, p.pre_activation_variance);
          },
          py::arg("x"), "(mean, variance, pre_activation_mean, pre_activation_variance) for one raw input.")
      .def("predict_batch", &predict_rows, py::arg("x"), "predict() applied to every row of x.")
      .def(
          "update",
          [](const NetworkState& n, const Vector& x, const Vector& y, double observation_noise) {
            BackwardOptions opts;
            if (observation_noise > 0.0) opts.observation_noise = Vector::Constant(n.output_dim, observation_noise);
            return update_one(n, x, y, opts);
          },
          py::arg("x"), py::arg("y"), py::arg("observation_noise") = 0.0,
          "Returns the network updated by one raw instance. The receiver is unchanged.")
      .def(py::self == py::self);

  py::class_<DatasetSplit>(m, "Split")
      .def_readonly("train_x", &DatasetSplit::train_x)
      .def_readonly("train_y", &DatasetSplit::train_y)
      .def_readonly("test_x", &DatasetSplit::test_x)
      .def_readonly("test_y", &DatasetSplit::test_y)
      .def_readonly("classification", &DatasetSplit::classification)
      .def_property_readonly("input_dim", &DatasetSplit::input_dim)
      .def_property_readonly("output_dim", &DatasetSplit::output_dim);

  m.def(
      "make_split",
      [](const Matrix& x, const Matrix& y, double test_fraction, std::uint64_t seed, bool standardize_features,
         bool standardize_targets, bool classification) {
        SplitOptions opts{test_fraction, standardize_features, standardize_targets, classification};
        return make_split(Dataset{x, y}, opts, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("test_fraction") = 0.1, py::arg("seed") = 0,
      py::arg("standardize_features") = true, py::arg("standardize_targets") = true,
      py::arg("classification") = false);

  m.def(
      "train",
      [](const NetworkState& net, const DatasetSplit& split, int epochs, bool shuffle, double observation_noise,
         std::uint64_t seed) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.shuffle_each_epoch = shuffle;
        cfg.observation_noise = observation_noise;
        cfg.seed = seed;
        cfg.validate();
        TrainReport report;
        NetworkState out;
        {
          py::gil_scoped_release release;
          std::tie(out, report) = train(net, split, cfg);
        }
        return py::make_tuple(out, report_dict(report));
      },
      py::arg("network"), py::arg("split"), py::arg("epochs") = 1, py::arg("shuffle") = true,
      py::arg("observation_noise") = 0.0, py::arg("seed") = 0,
      "Trains on split.train_* and evaluates on split.test_*. Returns (network, report).");

  m.def(
      "evaluate",
      [](const NetworkState& net, const Matrix& x, const Matrix& y, bool classification) {
        const Eigen::Index k = y.cols();
        Vector means(x.rows() * k), vars(x.rows() * k), targets(x.rows() * k);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const Prediction p = predict(net, x.row(i).transpose());
          means.segment(i * k, k) = p.mean;
          vars.segment(i * k, k) = p.variance;
          targets.segment(i * k, k) = y.row(i).transpose();
        }
        EvalResult e;
        e.rmse = rmse(means, targets);
        const NllResult nll = avg_nll(means, vars, targets);
        e.nll = nll.value;
        e.floored_variances = nll.floored;
        if (classification) e.accuracy = accuracy(means, targets);
        e.n = static_cast<std::size_t>(x.rows());
        return eval_dict(e);
      },
      py::arg("network"), py::arg("x"), py::arg("y"), py::arg("classification") = false,
      "Metrics on raw inputs and targets.");

  m.def("rmse", &rmse, py::arg("predictions"), py::arg("targets"));
  m.def(
      "avg_nll",
      [](const Vector& means, const Vector& variances, const Vector& targets) {
        return avg_nll(means, variances, targets).value;
      },
      py::arg("means"), py::arg("variances"), py::arg("targets"));
  m.def("accuracy", &accuracy, py::arg("means"), py::arg("labels"), py::arg("threshold") = 0.5);

  auto data = [](const Dataset& d) { return py::make_tuple(d.x, d.y); };
  m.def(
      "gen_cubic",
      [data](Eigen::Index n, double noise_std, std::uint64_t seed) {
        CubicSpec spec;
        spec.n = n;
        spec.noise_std = noise_std;
        return data(gen_cubic_data(spec, seed));
      },
      py::arg("n") = 800, py::arg("noise_std") = 3.0, py::arg("seed") = 0);
  m.def(
      "gen_moons", [data](Eigen::Index n, double noise_std, std::uint64_t seed) { return data(gen_moons(n, noise_std, seed)); },
      py::arg("n"), py::arg("noise_std") = 0.1, py::arg("seed") = 0);
  m.def(
      "gen_circles",
      [data](Eigen::Index n, double noise_std, double radius_factor, std::uint64_t seed) {
        return data(gen_circles(n, noise_std, radius_factor, seed));
      },
      py::arg("n"), py::arg("noise_std") = 0.1, py::arg("radius_factor") = 0.8, py::arg("seed") = 0);
  m.def("rotate_points", &rotate_points, py::arg("points"), py::arg("degrees"), py::arg("center"));
  m.def(
      "load_csv",
      [data](const std::filesystem::path& path, const std::string& target) { return data(load_csv_dataset(path, target)); },
      py::arg("path"), py::arg("target"), "(x, y) from a numeric CSV with a header row.");
}
