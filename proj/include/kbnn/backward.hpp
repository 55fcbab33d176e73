#pragma once

#include <vector>

#include "kbnn/forward.hpp"

namespace kbnn {

/// Updated moments of a layer's output (mu_z^{l+1,+}, C_z^{l+1,+}) flowing
/// down from the layer above, or from the observation at the top.
struct SmoothedLayerMessage {
  Vector mu_z_plus;
  Matrix C_z_plus;
};

struct SmoothedActivations {
  Vector mu_a_plus;
  Vector var_a_plus;
};

/// Result of the weight/input smoothing step for one layer.
struct LayerUpdate {
  std::vector<NeuronPosterior> neurons;
  /// Smoothed layer input without the constant-1 coordinate; empty for the
  /// first layer, whose input is observed.
  SmoothedLayerMessage message;
};

/// Joint Gaussian over the stacked [vec(W); z] of one layer.
struct JointGaussian {
  Vector mean;
  Matrix covariance;
};

struct BackwardOptions {
  /// Diagonal observation noise R per output; empty means R = 0.
  Vector observation_noise;
};

/// Step (I): smooths the pre-activations given the updated layer output.
/// The gain of neuron n is Cov[a_n, z_n] / Var[z_n] at index n only, since the
/// predicted output covariance is diagonal.
SmoothedActivations smooth_activations(const LayerForwardRecord& rec, const SmoothedLayerMessage& msg);

/// Cross-covariance between [vec(W); z] and a. Shape (M (D) + D) x M with
/// D = fan_in + 1: block-diagonal C_w^n mu_z on top, columns C_z mu_w^n below.
Matrix build_cwza(const LayerState& layer, const LayerForwardRecord& rec);

/// Step (II), neuron by neuron. The weight block of L dC_a L^T is block
/// diagonal, so the joint matrix is never formed.
LayerUpdate smooth_weights_and_inputs(const LayerState& layer, const LayerForwardRecord& rec,
                                      const SmoothedActivations& act);

/// Step (II) formed literally on the full joint state with an explicit
/// C_wza and a factorized C_a. Cubic in the layer size; meant for checking
/// smooth_weights_and_inputs on small layers.
JointGaussian smooth_joint_dense(const LayerState& layer, const LayerForwardRecord& rec,
                                 const SmoothedActivations& act);

/// Message at the top of the network for a target y (model scale). With
/// R = 0 this is (y, 0); otherwise the Kalman posterior of z^{L+1} given y.
SmoothedLayerMessage output_message(const LayerForwardRecord& last, const Vector& y,
                                    const Vector& observation_noise);

/// Updates every layer from L down to 1 for one instance and returns the new
/// state. `net` is left untouched; on NumericError no state is produced.
NetworkState backward(const NetworkState& net, const ForwardCache& cache, const Vector& y,
                      const BackwardOptions& options = {});

}  // namespace kbnn
