#pragma once

#include <string>
#include <string_view>

#include "kbnn/gaussian.hpp"

namespace kbnn {

/// sqrt(pi / 8): the scale under which the logistic sigmoid is replaced by the probit.
inline constexpr double kProbitScale = 0.62665706865775012;

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// Scalar activation function. PiecewiseLinear(alpha, beta) is max(alpha a, beta a)
/// with 0 <= alpha <= 1, beta >= 0, alpha <= beta; ReLU is (0, 1).
class Activation {
 public:
  enum class Kind { Linear, PiecewiseLinear, Sigmoid, Tanh, Probit, Heaviside };

  static Activation linear() { return Activation(Kind::Linear); }
  static Activation relu() { return piecewise_linear(0.0, 1.0); }
  static Activation piecewise_linear(double alpha, double beta);
  static Activation sigmoid() { return Activation(Kind::Sigmoid); }
  static Activation tanh() { return Activation(Kind::Tanh); }
  static Activation probit() { return Activation(Kind::Probit); }
  static Activation heaviside() { return Activation(Kind::Heaviside); }

  /// Accepts linear, relu, sigmoid, tanh, probit, heaviside, leaky_relu:<alpha>
  /// and pwl:<alpha>:<beta>. Throws ConfigError otherwise.
  static Activation parse(std::string_view text);
  /// Inverse of parse.
  std::string name() const;

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  /// The textbook function value (logistic sigmoid, std::tanh, ...).
  double operator()(double a) const;
  /// The function whose Gaussian moments propagate() matches. Identical to
  /// operator() except for Sigmoid and Tanh, which use the probit surrogate
  /// s(a) ~ Phi(kProbitScale a).
  double modeled(double a) const;

  /// Output confined to [0, 1] (Sigmoid, Probit, Heaviside).
  bool bounded_unit() const;

  friend bool operator==(const Activation&, const Activation&) = default;

 private:
  explicit Activation(Kind kind, double alpha = 1.0, double beta = 1.0)
      : kind_(kind), alpha_(alpha), beta_(beta) {}

  Kind kind_;
  double alpha_;
  double beta_;
};

struct ActivationMoments {
  double mean_z = 0.0;  ///< E[f(a)]
  double var_z = 0.0;   ///< Var[f(a)]
  double cov_az = 0.0;  ///< Cov[a, f(a)]
};

/// Moments of f(a) for a ~ N(in.mean, in.variance). Exact for Linear,
/// PiecewiseLinear, Probit and Heaviside; exact for the probit surrogate of
/// Sigmoid and Tanh. A zero input variance yields (f(mean), 0, 0).
/// Throws ContractError on a negative or non-finite variance.
ActivationMoments propagate(const Activation& act, ScalarGaussian in);

/// tanh moments through tanh(a) = 2 s(2a) - 1 applied to the sigmoid kernel.
ActivationMoments tanh_from_sigmoid(ScalarGaussian in);

}  // namespace kbnn
