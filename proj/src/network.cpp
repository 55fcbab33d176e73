#include "kbnn/network.hpp"

#include <cmath>
#include <sstream>

#include "kbnn/error.hpp"
#include "kbnn/rng.hpp"

namespace kbnn {

AffineStats AffineStats::identity(Eigen::Index dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

Vector AffineStats::standardize(const Vector& raw) const {
  if (raw.size() != mean.size()) {
    throw DimensionError("standardize: got " + std::to_string(raw.size()) + " values, expected " +
                         std::to_string(mean.size()));
  }
  return (raw - mean).cwiseQuotient(std);
}

Vector AffineStats::destandardize(const Vector& standardized) const {
  if (standardized.size() != mean.size()) {
    throw DimensionError("destandardize: got " + std::to_string(standardized.size()) +
                         " values, expected " + std::to_string(mean.size()));
  }
  return standardized.cwiseProduct(std) + mean;
}

std::vector<Eigen::Index> NetworkState::architecture() const {
  std::vector<Eigen::Index> arch{input_dim};
  for (const auto& layer : layers) arch.push_back(layer.width());
  return arch;
}

NetworkState init_network(const std::vector<Eigen::Index>& arch,
                          const std::vector<Activation>& activations, const PriorSpec& prior,
                          std::uint64_t seed) {
  if (arch.size() < 2) throw ConfigError("architecture needs at least an input and an output size");
  if (activations.size() != arch.size() - 1) {
    throw ConfigError("architecture has " + std::to_string(arch.size() - 1) + " layers but " +
                      std::to_string(activations.size()) + " activations were given");
  }
  for (auto size : arch) {
    if (size < 1) throw ConfigError("layer sizes must be positive");
  }
  if (!(prior.weight_variance > 0.0)) throw ConfigError("prior weight variance must be positive");

  Rng rng = make_stream(seed, "init");
  std::normal_distribution<double> normal(0.0, 1.0);

  NetworkState net;
  net.input_dim = arch.front();
  net.output_dim = arch.back();
  for (std::size_t l = 1; l < arch.size(); ++l) {
    LayerState layer;
    layer.fan_in = arch[l - 1];
    layer.activation = activations[l - 1];
    const Eigen::Index dim = layer.fan_in + 1;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Eigen::Index n = 0; n < arch[l]; ++n) {
      NeuronPosterior neuron;
      neuron.mean.resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) neuron.mean(i) = scale * normal(rng);
      neuron.covariance = prior.weight_variance * Matrix::Identity(dim, dim);
      layer.neurons.push_back(std::move(neuron));
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::size_t parameter_count(const NetworkState& net) {
  std::size_t count = 0;
  for (const auto& layer : net.layers) {
    const auto dim = static_cast<std::size_t>(layer.fan_in + 1);
    count += layer.neurons.size() * (dim + dim * dim);
  }
  return count;
}

void validate(const NetworkState& net) {
  if (net.layers.empty()) throw ConfigError("network has no layers");
  Eigen::Index expected_fan_in = net.input_dim;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.fan_in != expected_fan_in) {
      throw ConfigError(where + ": fan_in " + std::to_string(layer.fan_in) + " does not match " +
                        std::to_string(expected_fan_in));
    }
    if (layer.neurons.empty()) throw ConfigError(where + ": no neurons");
    for (const auto& neuron : layer.neurons) {
      if (neuron.mean.size() != layer.fan_in + 1 || neuron.covariance.rows() != layer.fan_in + 1 ||
          neuron.covariance.cols() != layer.fan_in + 1) {
        throw ConfigError(where + ": neuron weight dimension does not match fan_in + 1");
      }
    }
    expected_fan_in = layer.width();
  }
  if (expected_fan_in != net.output_dim) {
    throw ConfigError("last layer width does not match output_dim");
  }
  if (net.standardizer) {
    const auto& s = *net.standardizer;
    if (s.features.mean.size() != net.input_dim || s.features.std.size() != net.input_dim ||
        s.targets.mean.size() != net.output_dim || s.targets.std.size() != net.output_dim) {
      throw ConfigError("standardizer dimensions do not match the network");
    }
  }
}

std::vector<Eigen::Index> parse_architecture(const std::string& text) {
  std::vector<Eigen::Index> arch;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      arch.push_back(static_cast<Eigen::Index>(v));
    } catch (const std::exception&) {
      throw ConfigError("invalid layer size '" + item + "' in architecture '" + text + "'");
    }
  }
  if (arch.size() < 2) throw ConfigError("architecture '" + text + "' needs at least two sizes");
  return arch;
}

std::vector<Activation> parse_activations(const std::string& text) {
  std::vector<Activation> acts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) acts.push_back(Activation::parse(item));
  if (acts.empty()) throw ConfigError("empty activation list");
  return acts;
}

}  // namespace kbnn
