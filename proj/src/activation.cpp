#include "kbnn/activation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kbnn/error.hpp"

namespace kbnn {

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

void check_input(ScalarGaussian in) {
  if (!std::isfinite(in.mean) || !std::isfinite(in.variance)) {
    throw ContractError("propagate: non-finite input moments");
  }
  if (in.variance < 0.0) {
    throw ContractError("propagate: negative input variance " + std::to_string(in.variance));
  }
}

// Var[relu(a)] / sigma^2 as a function of r = mu / sigma.
double relu_variance_ratio(double r) {
  if (r > 0.0) {
    // relu(a) = a + relu(-a) keeps the large-r branch free of cancellation.
    return 1.0 - 2.0 * std_normal_cdf(-r) + relu_variance_ratio(-r);
  }
  const double cdf = std_normal_cdf(r);
  const double pdf = std_normal_pdf(r);
  const double mean = r * cdf + pdf;
  return std::max((r * r + 1.0) * cdf + r * pdf - mean * mean, 0.0);
}

ActivationMoments piecewise_moments(double alpha, double beta, ScalarGaussian in) {
  const double mu = in.mean;
  const double var = in.variance;
  const double sigma = std::sqrt(var);
  const double r = mu / sigma;
  const double cdf = std_normal_cdf(r);
  // p_a = sigma^2 N(0 | mu, sigma^2)
  const double pa = sigma * std_normal_pdf(r);
  const double slope = beta - alpha;

  ActivationMoments out;
  out.mean_z = alpha * mu + slope * (mu * cdf + pa);
  out.var_z = var * (alpha * alpha + 2.0 * alpha * slope * cdf +
                     slope * slope * relu_variance_ratio(r));
  // Stein: Cov[a, f(a)] = sigma^2 E[f'(a)]
  out.cov_az = var * (alpha + slope * cdf);
  return out;
}

// Var[Phi(b)] for b ~ N(m, s2) via Sheppard's integral
//   Phi2(h, h; rho) - Phi(h)^2 = 1/(2 pi) int_0^{asin rho} exp(-h^2 / (1 + sin t)) dt
// with h = m / sqrt(1 + s2) and rho = s2 / (1 + s2).
double probit_variance(double h, double rho) {
  if (rho <= 0.0) return 0.0;
  const double upper = std::asin(std::min(rho, 1.0));
  const double h2 = h * h;
  auto integrand = [h2](double t) { return std::exp(-h2 / (1.0 + std::sin(t))); };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, upper, 12, 1e-14);
  return integral / (2.0 * std::numbers::pi);
}

ActivationMoments probit_moments(ScalarGaussian in) {
  const double t = std::sqrt(1.0 + in.variance);
  const double h = in.mean / t;
  ActivationMoments out;
  out.mean_z = std_normal_cdf(h);
  out.var_z = probit_variance(h, in.variance / (1.0 + in.variance));
  out.cov_az = in.variance / t * std_normal_pdf(h);
  return out;
}

ActivationMoments sigmoid_moments(ScalarGaussian in) {
  // s(a) ~ Phi(lambda a): run the probit kernel on b = lambda a.
  const double lambda = kProbitScale;
  ActivationMoments out = probit_moments({lambda * in.mean, lambda * lambda * in.variance});
  out.cov_az /= lambda;
  return out;
}

ActivationMoments heaviside_moments(ScalarGaussian in) {
  const double sigma = std::sqrt(in.variance);
  const double r = in.mean / sigma;
  ActivationMoments out;
  out.mean_z = std_normal_cdf(r);
  out.var_z = out.mean_z * std_normal_cdf(-r);
  out.cov_az = sigma * std_normal_pdf(r);
  return out;
}

double parse_number(std::string_view text, std::string_view whole) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("activation: cannot parse number in '" + std::string(whole) + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Activation Activation::piecewise_linear(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0) || alpha > beta) {
    throw ConfigError("piecewise linear activation requires 0 <= alpha <= 1, beta >= 0, alpha <= beta");
  }
  return Activation(Kind::PiecewiseLinear, alpha, beta);
}

Activation Activation::parse(std::string_view text) {
  if (text == "linear" || text == "identity") return linear();
  if (text == "relu") return relu();
  if (text == "sigmoid") return sigmoid();
  if (text == "tanh") return tanh();
  if (text == "probit") return probit();
  if (text == "heaviside" || text == "step") return heaviside();
  if (text.starts_with("leaky_relu:")) {
    return piecewise_linear(parse_number(text.substr(11), text), 1.0);
  }
  if (text.starts_with("pwl:")) {
    const auto rest = text.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("activation: expected pwl:<alpha>:<beta>, got '" + std::string(text) + "'");
    }
    return piecewise_linear(parse_number(rest.substr(0, colon), text),
                            parse_number(rest.substr(colon + 1), text));
  }
  throw ConfigError("unknown activation '" + std::string(text) + "'");
}

std::string Activation::name() const {
  switch (kind_) {
    case Kind::Linear: return "linear";
    case Kind::Sigmoid: return "sigmoid";
    case Kind::Tanh: return "tanh";
    case Kind::Probit: return "probit";
    case Kind::Heaviside: return "heaviside";
    case Kind::PiecewiseLinear:
      if (alpha_ == 0.0 && beta_ == 1.0) return "relu";
      return "pwl:" + format_number(alpha_) + ":" + format_number(beta_);
  }
  return "linear";
}

double Activation::operator()(double a) const {
  switch (kind_) {
    case Kind::Sigmoid: return 1.0 / (1.0 + std::exp(-a));
    case Kind::Tanh: return std::tanh(a);
    default: return modeled(a);
  }
}

double Activation::modeled(double a) const {
  switch (kind_) {
    case Kind::Linear: return a;
    case Kind::PiecewiseLinear: return std::max(alpha_ * a, beta_ * a);
    case Kind::Sigmoid: return std_normal_cdf(kProbitScale * a);
    case Kind::Tanh: return 2.0 * std_normal_cdf(2.0 * kProbitScale * a) - 1.0;
    case Kind::Probit: return std_normal_cdf(a);
    case Kind::Heaviside: return a >= 0.0 ? 1.0 : 0.0;
  }
  return a;
}

bool Activation::bounded_unit() const {
  return kind_ == Kind::Sigmoid || kind_ == Kind::Probit || kind_ == Kind::Heaviside;
}

ActivationMoments propagate(const Activation& act, ScalarGaussian in) {
  check_input(in);
  if (act.kind() == Activation::Kind::Linear) return {in.mean, in.variance, in.variance};
  if (in.variance == 0.0) return {act.modeled(in.mean), 0.0, 0.0};

  switch (act.kind()) {
    case Activation::Kind::PiecewiseLinear: return piecewise_moments(act.alpha(), act.beta(), in);
    case Activation::Kind::Sigmoid: return sigmoid_moments(in);
    case Activation::Kind::Tanh: return tanh_from_sigmoid(in);
    case Activation::Kind::Probit: return probit_moments(in);
    case Activation::Kind::Heaviside: return heaviside_moments(in);
    case Activation::Kind::Linear: break;
  }
  return {in.mean, in.variance, in.variance};
}

ActivationMoments tanh_from_sigmoid(ScalarGaussian in) {
  check_input(in);
  // tanh(a) = 2 s(2a) - 1; Cov[a, 2 s(2a) - 1] = Cov[2a, s(2a)].
  const ActivationMoments s = propagate(Activation::sigmoid(), {2.0 * in.mean, 4.0 * in.variance});
  return {2.0 * s.mean_z - 1.0, 4.0 * s.var_z, s.cov_az};
}

}  // namespace kbnn
