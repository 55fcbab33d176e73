#pragma once

#include <utility>
#include <vector>

#include "kbnn/network.hpp"

namespace kbnn {

/// Per-layer predictive moments kept for the backward pass.
struct LayerForwardRecord {
  Vector mu_a;       ///< pre-activation means, length M_l
  Vector var_a;      ///< pre-activation variances (diagonal C_a)
  Vector mu_z_in;    ///< layer input mean with the leading 1, length fan_in + 1
  Vector var_z_in;   ///< diagonal of the input covariance; entry 0 is 0
  Vector cov_az;     ///< Cov[a_n, z_n] per neuron
  Vector mu_z_out;   ///< activation means
  Vector var_z_out;  ///< activation variances
  bool deterministic_input = false;

  Matrix input_covariance() const { return var_z_in.asDiagonal(); }
};

struct ForwardCache {
  std::vector<LayerForwardRecord> layers;
};

struct Prediction {
  Vector mean;                     ///< mu_y (raw target scale when produced by forward())
  Vector variance;                 ///< sigma_y^2, diagonal
  Vector pre_activation_mean;      ///< mu_a of the last layer (model scale)
  Vector pre_activation_variance;  ///< (sigma_a^L)^2 (model scale)
};

/// One layer of moment propagation. `in_mean` carries the leading 1 and
/// `in_var` the diagonal input covariance with a 0 in front. With
/// `deterministic_input` the input covariance is ignored and the pre-activation
/// variance reduces to x^T C_w x.
LayerForwardRecord layer_forward(const LayerState& layer, const Vector& in_mean,
                                 const Vector& in_var, bool deterministic_input);

/// Forward pass in model (standardized) coordinates.
std::pair<Prediction, ForwardCache> forward_standardized(const NetworkState& net, const Vector& x);

/// Forward pass on a raw input. Applies the network's standardizer on the way
/// in and maps mean and variance back to target units on the way out.
std::pair<Prediction, ForwardCache> forward(const NetworkState& net, const Vector& x);

/// forward() without the cache.
Prediction predict(const NetworkState& net, const Vector& x);

}  // namespace kbnn
