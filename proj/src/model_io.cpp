#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kbnn/error.hpp"
#include "kbnn/network.hpp"

namespace kbnn {

using nlohmann::json;

namespace {

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

json stats_to_json(const AffineStats& s) {
  return {{"mean", vector_to_json(s.mean)}, {"std", vector_to_json(s.std)}};
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw LoadError(path + ": missing field '" + key + "'");
  return obj.at(key);
}

Vector read_vector(const json& arr, Eigen::Index expected, const std::string& path) {
  if (!arr.is_array()) throw LoadError(path + ": expected an array");
  if (static_cast<Eigen::Index>(arr.size()) != expected) {
    throw LoadError(path + ": expected " + std::to_string(expected) + " values, found " +
                    std::to_string(arr.size()));
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    const auto& x = arr[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw LoadError(path + "[" + std::to_string(i) + "]: not a number");
    v(i) = x.get<double>();
  }
  return v;
}

AffineStats read_stats(const json& obj, Eigen::Index dim, const std::string& path) {
  AffineStats s;
  s.mean = read_vector(field(obj, "mean", path), dim, path + ".mean");
  s.std = read_vector(field(obj, "std", path), dim, path + ".std");
  if ((s.std.array() <= 0.0).any()) throw LoadError(path + ".std: standard deviations must be positive");
  return s;
}

}  // namespace

std::string to_json_string(const NetworkState& net) {
  json doc;
  doc["format"] = kModelFormat;
  json arch = json::array();
  for (auto size : net.architecture()) arch.push_back(size);
  doc["architecture"] = arch;
  json acts = json::array();
  for (const auto& layer : net.layers) acts.push_back(layer.activation.name());
  doc["activations"] = acts;
  if (net.standardizer) {
    doc["standardizer"] = {{"features", stats_to_json(net.standardizer->features)},
                           {"targets", stats_to_json(net.standardizer->targets)}};
  } else {
    doc["standardizer"] = nullptr;
  }
  json layers = json::array();
  for (const auto& layer : net.layers) {
    json neurons = json::array();
    for (const auto& neuron : layer.neurons) {
      neurons.push_back({{"mean", vector_to_json(neuron.mean)},
                         {"covariance", matrix_to_json(neuron.covariance)}});
    }
    layers.push_back({{"neurons", neurons}});
  }
  doc["layers"] = layers;
  return doc.dump(1);
}

NetworkState from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("malformed model document: ") + e.what());
  }
  const auto& format = field(doc, "format", "model");
  if (!format.is_string() || format.get<std::string>() != kModelFormat) {
    throw LoadError("model.format: expected '" + std::string(kModelFormat) + "'");
  }

  const auto& arch_json = field(doc, "architecture", "model");
  std::vector<Eigen::Index> arch;
  if (!arch_json.is_array() || arch_json.size() < 2) {
    throw LoadError("model.architecture: expected at least two layer sizes");
  }
  for (std::size_t i = 0; i < arch_json.size(); ++i) {
    if (!arch_json[i].is_number_integer() || arch_json[i].get<long long>() < 1) {
      throw LoadError("model.architecture[" + std::to_string(i) + "]: expected a positive integer");
    }
    arch.push_back(arch_json[i].get<Eigen::Index>());
  }
  const std::size_t n_layers = arch.size() - 1;

  const auto& acts_json = field(doc, "activations", "model");
  if (!acts_json.is_array() || acts_json.size() != n_layers) {
    throw LoadError("model.activations: expected " + std::to_string(n_layers) + " entries");
  }
  const auto& layers_json = field(doc, "layers", "model");
  if (!layers_json.is_array() || layers_json.size() != n_layers) {
    throw LoadError("model.layers: expected " + std::to_string(n_layers) + " layers");
  }

  NetworkState net;
  net.input_dim = arch.front();
  net.output_dim = arch.back();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::string path = "model.layers[" + std::to_string(l) + "]";
    LayerState layer;
    layer.fan_in = arch[l];
    try {
      layer.activation = Activation::parse(acts_json[l].get<std::string>());
    } catch (const std::exception& e) {
      throw LoadError("model.activations[" + std::to_string(l) + "]: " + e.what());
    }
    const auto& neurons = field(layers_json[l], "neurons", path);
    if (!neurons.is_array() || static_cast<Eigen::Index>(neurons.size()) != arch[l + 1]) {
      throw LoadError(path + ".neurons: expected " + std::to_string(arch[l + 1]) + " neurons");
    }
    const Eigen::Index dim = layer.fan_in + 1;
    for (std::size_t n = 0; n < neurons.size(); ++n) {
      const std::string npath = path + ".neurons[" + std::to_string(n) + "]";
      NeuronPosterior neuron;
      neuron.mean = read_vector(field(neurons[n], "mean", npath), dim, npath + ".mean");
      const Vector flat = read_vector(field(neurons[n], "covariance", npath), dim * dim,
                                      npath + ".covariance");
      neuron.covariance = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                         Eigen::RowMajor>>(flat.data(), dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (!(neuron.covariance(i, i) >= 0.0)) {
          throw LoadError(npath + ".covariance: negative variance on diagonal entry " +
                          std::to_string(i));
        }
      }
      layer.neurons.push_back(std::move(neuron));
    }
    net.layers.push_back(std::move(layer));
  }

  const auto& stdz = field(doc, "standardizer", "model");
  if (!stdz.is_null()) {
    Standardizer s;
    s.features = read_stats(field(stdz, "features", "model.standardizer"), net.input_dim,
                            "model.standardizer.features");
    s.targets = read_stats(field(stdz, "targets", "model.standardizer"), net.output_dim,
                           "model.standardizer.targets");
    net.standardizer = std::move(s);
  }
  return net;
}

void save_model(const NetworkState& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << to_json_string(net) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

NetworkState load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open model file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

}  // namespace kbnn
