#include "kbnn/backward.hpp"

#include <algorithm>
#include <cmath>

#include "kbnn/error.hpp"

namespace kbnn {

namespace {

double clamp_smoothed(double smoothed) { return std::max(smoothed, 0.0); }

}  // namespace

SmoothedActivations smooth_activations(const LayerForwardRecord& rec, const SmoothedLayerMessage& msg) {
  const Eigen::Index width = rec.mu_a.size();
  if (msg.mu_z_plus.size() != width || msg.C_z_plus.rows() != width || msg.C_z_plus.cols() != width) {
    throw DimensionError("smooth_activations: message has dimension " +
                         std::to_string(msg.mu_z_plus.size()) + ", layer width is " +
                         std::to_string(width));
  }
  SmoothedActivations out{Vector(width), Vector(width)};
  for (Eigen::Index n = 0; n < width; ++n) {
    // k_n is nonzero only at index n.
    const double gain = rec.cov_az(n) / floor_variance(rec.var_z_out(n));
    out.mu_a_plus(n) = rec.mu_a(n) + gain * (msg.mu_z_plus(n) - rec.mu_z_out(n));
    const double smoothed = rec.var_a(n) + gain * gain * (msg.C_z_plus(n, n) - rec.var_z_out(n));
    out.var_a_plus(n) = clamp_smoothed(smoothed);
  }
  return out;
}

Matrix build_cwza(const LayerState& layer, const LayerForwardRecord& rec) {
  const Eigen::Index dim = layer.fan_in + 1;
  const Eigen::Index width = layer.width();
  if (rec.mu_z_in.size() != dim || rec.mu_a.size() != width) {
    throw DimensionError("build_cwza: forward record does not match the layer");
  }
  Matrix cwza = Matrix::Zero(width * dim + dim, width);
  for (Eigen::Index n = 0; n < width; ++n) {
    const auto& w = layer.neurons[static_cast<std::size_t>(n)];
    cwza.block(n * dim, n, dim, 1) = w.covariance * rec.mu_z_in;
    cwza.block(width * dim, n, dim, 1) = rec.var_z_in.cwiseProduct(w.mean);
  }
  return cwza;
}

LayerUpdate smooth_weights_and_inputs(const LayerState& layer, const LayerForwardRecord& rec,
                                      const SmoothedActivations& act) {
  const Eigen::Index dim = layer.fan_in + 1;
  const Eigen::Index width = layer.width();
  if (act.mu_a_plus.size() != width || act.var_a_plus.size() != width || rec.mu_z_in.size() != dim) {
    throw DimensionError("smooth_weights_and_inputs: dimension mismatch");
  }

  LayerUpdate out;
  out.neurons.reserve(static_cast<std::size_t>(width));
  const bool carry_input = !rec.deterministic_input;
  Vector mu_z = rec.mu_z_in;
  Matrix C_z;
  if (carry_input) C_z = rec.var_z_in.asDiagonal();

  for (Eigen::Index n = 0; n < width; ++n) {
    const auto& prior = layer.neurons[static_cast<std::size_t>(n)];
    const double s = floor_variance(rec.var_a(n));
    const double d_mean = (act.mu_a_plus(n) - rec.mu_a(n)) / s;
    const double d_var = (act.var_a_plus(n) - rec.var_a(n)) / (s * s);

    // Column n of L restricted to w_n and to z.
    const Vector g = prior.covariance * rec.mu_z_in;
    NeuronPosterior post;
    post.mean = prior.mean + d_mean * g;
    post.covariance = clamp_psd(symmetrize(prior.covariance + d_var * (g * g.transpose())));
    out.neurons.push_back(std::move(post));

    if (carry_input) {
      const Vector h = rec.var_z_in.cwiseProduct(prior.mean);
      mu_z += d_mean * h;
      C_z.noalias() += d_var * (h * h.transpose());
    }
  }

  if (carry_input) {
    out.message.mu_z_plus = mu_z.tail(dim - 1);
    out.message.C_z_plus = clamp_psd(symmetrize(C_z.bottomRightCorner(dim - 1, dim - 1)));
  }
  return out;
}

JointGaussian smooth_joint_dense(const LayerState& layer, const LayerForwardRecord& rec,
                                 const SmoothedActivations& act) {
  const Eigen::Index dim = layer.fan_in + 1;
  const Eigen::Index width = layer.width();
  const Eigen::Index total = width * dim + dim;

  JointGaussian prior{Vector(total), Matrix::Zero(total, total)};
  for (Eigen::Index n = 0; n < width; ++n) {
    const auto& w = layer.neurons[static_cast<std::size_t>(n)];
    prior.mean.segment(n * dim, dim) = w.mean;
    prior.covariance.block(n * dim, n * dim, dim, dim) = w.covariance;
  }
  prior.mean.tail(dim) = rec.mu_z_in;
  prior.covariance.bottomRightCorner(dim, dim) = rec.var_z_in.asDiagonal();

  const Matrix cwza = build_cwza(layer, rec);
  Matrix C_a = Matrix::Zero(width, width);
  for (Eigen::Index n = 0; n < width; ++n) C_a(n, n) = floor_variance(rec.var_a(n));
  // L = C_wza C_a^{-1}  <=>  C_a L^T = C_wza^T
  const Matrix gain = spd_solve(C_a, cwza.transpose()).transpose();

  const Vector d_mean = act.mu_a_plus - rec.mu_a;
  const Matrix d_cov = (act.var_a_plus - rec.var_a).asDiagonal();
  JointGaussian post;
  post.mean = prior.mean + gain * d_mean;
  post.covariance = symmetrize(prior.covariance + gain * d_cov * gain.transpose());
  return post;
}

SmoothedLayerMessage output_message(const LayerForwardRecord& last, const Vector& y,
                                    const Vector& observation_noise) {
  const Eigen::Index e = last.mu_z_out.size();
  if (y.size() != e) {
    throw DimensionError("backward: target has " + std::to_string(y.size()) + " entries, network outputs " +
                         std::to_string(e));
  }
  if (observation_noise.size() != 0 && observation_noise.size() != e) {
    throw DimensionError("backward: observation noise must have one entry per output");
  }
  SmoothedLayerMessage msg{y, Matrix::Zero(e, e)};
  if (observation_noise.size() == 0) return msg;
  for (Eigen::Index n = 0; n < e; ++n) {
    const double noise = observation_noise(n);
    if (noise < 0.0) throw ContractError("backward: observation noise must be non-negative");
    if (noise == 0.0) continue;
    const double v = last.var_z_out(n);
    const double gain = v / (v + noise);
    msg.mu_z_plus(n) = last.mu_z_out(n) + gain * (y(n) - last.mu_z_out(n));
    msg.C_z_plus(n, n) = v * noise / (v + noise);
  }
  return msg;
}

NetworkState backward(const NetworkState& net, const ForwardCache& cache, const Vector& y,
                      const BackwardOptions& options) {
  if (cache.layers.size() != net.layers.size()) {
    throw DimensionError("backward: forward cache does not belong to this network");
  }
  NetworkState updated = net;
  SmoothedLayerMessage msg = output_message(cache.layers.back(), y, options.observation_noise);

  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const auto& rec = cache.layers[i];
    try {
      const SmoothedActivations act = smooth_activations(rec, msg);
      LayerUpdate upd = smooth_weights_and_inputs(net.layers[i], rec, act);
      for (const auto& neuron : upd.neurons) {
        if (!neuron.mean.allFinite() || !neuron.covariance.allFinite()) {
          throw NumericError("non-finite posterior");
        }
      }
      updated.layers[i].neurons = std::move(upd.neurons);
      msg = std::move(upd.message);
    } catch (const SingularMatrixError&) {
      throw;
    } catch (const NumericError& e) {
      throw NumericError("layer " + std::to_string(i + 1) + ": " + e.what(), static_cast<int>(i));
    }
  }
  return updated;
}

}  // namespace kbnn
