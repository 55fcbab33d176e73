#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kbnn/activation.hpp"
#include "kbnn/gaussian.hpp"

namespace kbnn {

/// Gaussian posterior over one neuron's weights. Index 0 is the bias, paired
/// with a constant 1 prepended to the layer input.
struct NeuronPosterior {
  Vector mean;
  Matrix covariance;

  friend bool operator==(const NeuronPosterior& a, const NeuronPosterior& b) {
    return a.mean == b.mean && a.covariance == b.covariance;
  }
};

/// One dense layer. Neurons are independent: no cross-neuron covariance exists.
struct LayerState {
  std::vector<NeuronPosterior> neurons;
  Activation activation = Activation::linear();
  Eigen::Index fan_in = 0;

  Eigen::Index width() const { return static_cast<Eigen::Index>(neurons.size()); }
  friend bool operator==(const LayerState&, const LayerState&) = default;
};

/// Per-column affine statistics; standardized = (raw - mean) / std.
struct AffineStats {
  Vector mean;
  Vector std;

  static AffineStats identity(Eigen::Index dim);
  Vector standardize(const Vector& raw) const;
  Vector destandardize(const Vector& standardized) const;
  friend bool operator==(const AffineStats& a, const AffineStats& b) {
    return a.mean == b.mean && a.std == b.std;
  }
};

struct Standardizer {
  AffineStats features;
  AffineStats targets;
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct NetworkState {
  std::vector<LayerState> layers;
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;
  /// Raw-scale <-> model-scale mapping. Absent means identity.
  std::optional<Standardizer> standardizer;

  /// Layer sizes including the input: [d, M_1, ..., M_L].
  std::vector<Eigen::Index> architecture() const;
  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

struct PriorSpec {
  /// Diagonal prior weight variance sigma0^2.
  double weight_variance = 1.0;
};

/// Prior network: weight means ~ N(0, 1/(fan_in+1)) drawn from `seed`,
/// covariances prior.weight_variance * I. Throws ConfigError when
/// arch.size() < 2, activations.size() != arch.size() - 1 or a size is zero.
NetworkState init_network(const std::vector<Eigen::Index>& arch,
                          const std::vector<Activation>& activations, const PriorSpec& prior,
                          std::uint64_t seed);

/// Number of stored scalars: means plus full covariance entries.
std::size_t parameter_count(const NetworkState& net);

/// Throws ConfigError when the layer shapes are inconsistent.
void validate(const NetworkState& net);

/// "2,10,10,1" -> {2, 10, 10, 1}
std::vector<Eigen::Index> parse_architecture(const std::string& text);
/// "relu,relu,sigmoid" -> activations
std::vector<Activation> parse_activations(const std::string& text);

inline constexpr const char* kModelFormat = "kbnn-model-v1";

std::string to_json_string(const NetworkState& net);
NetworkState from_json_string(const std::string& text);
void save_model(const NetworkState& net, const std::filesystem::path& path);
/// Throws LoadError naming the offending field.
NetworkState load_model(const std::filesystem::path& path);

}  // namespace kbnn
