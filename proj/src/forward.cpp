#include "kbnn/forward.hpp"

#include <algorithm>
#include <cmath>

#include "kbnn/error.hpp"

namespace kbnn {

LayerForwardRecord layer_forward(const LayerState& layer, const Vector& in_mean,
                                 const Vector& in_var, bool deterministic_input) {
  const Eigen::Index dim = layer.fan_in + 1;
  if (in_mean.size() != dim || in_var.size() != dim) {
    throw DimensionError("layer_forward: input has " + std::to_string(in_mean.size()) +
                         " entries, layer expects fan_in + 1 = " + std::to_string(dim));
  }
  const Eigen::Index width = layer.width();

  LayerForwardRecord rec;
  rec.deterministic_input = deterministic_input;
  rec.mu_z_in = in_mean;
  rec.var_z_in = in_var;
  rec.var_z_in(0) = 0.0;
  if (deterministic_input) rec.var_z_in.setZero();
  rec.mu_a.resize(width);
  rec.var_a.resize(width);
  rec.cov_az.resize(width);
  rec.mu_z_out.resize(width);
  rec.var_z_out.resize(width);

  for (Eigen::Index n = 0; n < width; ++n) {
    const auto& w = layer.neurons[static_cast<std::size_t>(n)];
    if (w.mean.size() != dim) throw DimensionError("layer_forward: neuron weight length mismatch");
    const double mu_a = w.mean.dot(rec.mu_z_in);
    // mu_z^T C_w mu_z
    double var_a = rec.mu_z_in.dot(w.covariance * rec.mu_z_in);
    if (!deterministic_input) {
      // + mu_w^T C_z mu_w + Tr(C_w C_z) for diagonal C_z
      var_a += rec.var_z_in.dot(w.mean.cwiseAbs2()) + rec.var_z_in.dot(w.covariance.diagonal());
    }
    var_a = std::max(var_a, 0.0);
    if (!std::isfinite(mu_a) || !std::isfinite(var_a)) {
      throw NumericError("layer_forward: non-finite pre-activation moments");
    }
    const ActivationMoments m = propagate(layer.activation, {mu_a, var_a});
    rec.mu_a(n) = mu_a;
    rec.var_a(n) = var_a;
    rec.cov_az(n) = m.cov_az;
    rec.mu_z_out(n) = m.mean_z;
    rec.var_z_out(n) = m.var_z;
  }
  return rec;
}

std::pair<Prediction, ForwardCache> forward_standardized(const NetworkState& net, const Vector& x) {
  if (x.size() != net.input_dim) {
    throw DimensionError("forward: input has " + std::to_string(x.size()) + " features, network expects " +
                         std::to_string(net.input_dim));
  }
  ForwardCache cache;
  cache.layers.reserve(net.layers.size());

  Vector mean(x.size() + 1);
  mean << 1.0, x;
  Vector var = Vector::Zero(x.size() + 1);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerForwardRecord rec = layer_forward(net.layers[l], mean, var, l == 0);
    mean.resize(rec.mu_z_out.size() + 1);
    mean << 1.0, rec.mu_z_out;
    var.resize(rec.var_z_out.size() + 1);
    var << 0.0, rec.var_z_out;
    cache.layers.push_back(std::move(rec));
  }

  const auto& last = cache.layers.back();
  Prediction pred{last.mu_z_out, last.var_z_out, last.mu_a, last.var_a};
  return {std::move(pred), std::move(cache)};
}

std::pair<Prediction, ForwardCache> forward(const NetworkState& net, const Vector& x) {
  if (!net.standardizer) return forward_standardized(net, x);
  const auto& s = *net.standardizer;
  auto result = forward_standardized(net, s.features.standardize(x));
  Prediction& pred = result.first;
  pred.mean = s.targets.destandardize(pred.mean);
  pred.variance = pred.variance.cwiseProduct(s.targets.std.cwiseAbs2());
  return result;
}

Prediction predict(const NetworkState& net, const Vector& x) { return forward(net, x).first; }

}  // namespace kbnn
