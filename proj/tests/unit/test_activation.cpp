#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kbnn/activation.hpp"
#include "kbnn/error.hpp"
#include "oracles.hpp"

using namespace kbnn;

namespace {

std::vector<Activation> all_activations() {
  return {Activation::linear(),  Activation::relu(),    Activation::piecewise_linear(0.1, 1.0),
          Activation::piecewise_linear(1.0, 1.0), Activation::piecewise_linear(0.2, 2.5),
          Activation::sigmoid(), Activation::tanh(),    Activation::probit(),
          Activation::heaviside()};
}

}  // namespace

TEST_CASE("relu at the standard normal") {
  const auto m = propagate(Activation::relu(), {0.0, 1.0});
  CHECK(m.mean_z == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(m.var_z == doctest::Approx(0.5 - 1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(m.var_z == doctest::Approx(0.340845).epsilon(1e-6));
  CHECK(m.cov_az == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("linear and identity-equivalent piecewise linear") {
  const auto lin = propagate(Activation::linear(), {3.0, 2.0});
  CHECK(lin.mean_z == 3.0);
  CHECK(lin.var_z == 2.0);
  CHECK(lin.cov_az == 2.0);
  for (double mu : {-2.0, 0.0, 0.7}) {
    const auto m = propagate(Activation::piecewise_linear(1.0, 1.0), {mu, 1.5});
    CHECK(m.mean_z == doctest::Approx(mu).epsilon(1e-14));
    CHECK(m.var_z == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(m.cov_az == doctest::Approx(1.5).epsilon(1e-14));
  }
}

TEST_CASE("sigmoid examples") {
  const auto det = propagate(Activation::sigmoid(), {0.0, 0.0});
  CHECK(det.mean_z == 0.5);
  CHECK(det.var_z == 0.0);
  CHECK(det.cov_az == 0.0);

  const auto m = propagate(Activation::sigmoid(), {0.0, 1.0});
  CHECK(m.mean_z == doctest::Approx(0.5).epsilon(1e-15));
  const double t = std::sqrt(1.0 + std::numbers::pi / 8.0);
  // Exact variance of the probit surrogate: (1/2pi) asin(lambda^2 / (1 + lambda^2)) at mu = 0.
  const double l2 = std::numbers::pi / 8.0;
  CHECK(m.var_z == doctest::Approx(std::asin(l2 / (1.0 + l2)) / (2.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(m.cov_az == doctest::Approx(kProbitScale * std_normal_pdf(0.0) / t).epsilon(1e-14));
  MESSAGE("closed-form approximation 0.25(1 - 1/t) = " << 0.25 * (1.0 - 1.0 / t) << ", exact surrogate = " << m.var_z);

  std::mt19937_64 rng(7);
  const auto mc = oracle::monte_carlo([](double a) { return std_normal_cdf(kProbitScale * a); }, 0.0, 1.0,
                                      2'000'000, rng);
  CHECK(std::abs(mc.value.mean - m.mean_z) <= 3.0 * mc.se.mean);
  CHECK(std::abs(mc.value.var - m.var_z) <= 4.0 * mc.se.var);
}

TEST_CASE("probit mean is exact") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mu(-5, 5), var(0.0, 9.0);
  for (int i = 0; i < 200; ++i) {
    const double m = mu(rng), v = var(rng);
    const auto out = propagate(Activation::probit(), {m, v});
    CHECK(out.mean_z == doctest::Approx(std_normal_cdf(m / std::sqrt(1.0 + v))).epsilon(1e-15));
  }
}

TEST_CASE("heaviside moments") {
  const auto m = propagate(Activation::heaviside(), {0.5, 4.0});
  const double r = 0.25;
  CHECK(m.mean_z == doctest::Approx(std_normal_cdf(r)).epsilon(1e-15));
  CHECK(m.var_z == doctest::Approx(m.mean_z * (1.0 - m.mean_z)).epsilon(1e-14));
  CHECK(m.cov_az == doctest::Approx(2.0 * std_normal_pdf(r)).epsilon(1e-14));
  const auto step = propagate(Activation::heaviside(), {0.0, 0.0});
  CHECK(step.mean_z == 1.0);
  CHECK(step.var_z == 0.0);
}

TEST_CASE("tanh through the sigmoid identity") {
  const auto zero = tanh_from_sigmoid({0.0, 0.0});
  CHECK(zero.mean_z == 0.0);
  CHECK(zero.var_z == 0.0);
  CHECK(zero.cov_az == 0.0);
  const auto sat = tanh_from_sigmoid({10.0, 0.0});
  CHECK(sat.mean_z == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sat.var_z == 0.0);
  const auto odd = tanh_from_sigmoid({0.0, 1.0});
  CHECK(std::abs(odd.mean_z) < 1e-15);

  std::mt19937_64 rng(9);
  const auto surrogate = [](double a) { return 2.0 * std_normal_cdf(2.0 * kProbitScale * a) - 1.0; };
  const auto mc = oracle::monte_carlo(surrogate, 0.0, 1.0, 2'000'000, rng);
  CHECK(std::abs(mc.value.var - odd.var_z) <= 4.0 * mc.se.var);
  CHECK(std::abs(mc.value.cov - odd.cov_az) <= 4.0 * mc.se.cov);

  const auto direct = propagate(Activation::tanh(), {0.3, 2.0});
  const auto via = tanh_from_sigmoid({0.3, 2.0});
  CHECK(direct.mean_z == via.mean_z);
  CHECK(direct.var_z == via.var_z);
  CHECK(direct.cov_az == via.cov_az);
}

TEST_CASE("piecewise linear agrees with quadrature") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> mu(-5, 5), var(1e-3, 9.0);
  for (const auto& act : {Activation::relu(), Activation::piecewise_linear(0.1, 1.0),
                          Activation::piecewise_linear(1.0, 1.0)}) {
    for (int i = 0; i < 50; ++i) {
      const double m = mu(rng), v = var(rng);
      const auto got = propagate(act, {m, v});
      const auto ref = oracle::quadrature([&](double a) { return act(a); }, m, v);
      const double sd = std::sqrt(v);
      CHECK(std::abs(got.mean_z - ref.mean) <= 1e-10 * std::max(std::abs(ref.mean), 1e-12 * sd));
      CHECK(std::abs(got.var_z - ref.var) <= 1e-10 * std::max(std::abs(ref.var), 1e-12 * v));
      CHECK(std::abs(got.cov_az - ref.cov) <= 1e-10 * std::max(std::abs(ref.cov), 1e-12 * v));
    }
  }
}

TEST_CASE("smooth kernels agree with quadrature of their modeled function") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> mu(-5, 5), var(1e-3, 9.0);
  for (const auto& act : {Activation::sigmoid(), Activation::tanh(), Activation::probit()}) {
    for (int i = 0; i < 50; ++i) {
      const double m = mu(rng), v = var(rng);
      const auto got = propagate(act, {m, v});
      const auto ref = oracle::quadrature([&](double a) { return act.modeled(a); }, m, v, {});
      CHECK(got.mean_z == doctest::Approx(ref.mean).epsilon(1e-10));
      CHECK(got.var_z == doctest::Approx(ref.var).epsilon(1e-8).scale(1e-12));
      CHECK(got.cov_az == doctest::Approx(ref.cov).epsilon(1e-8).scale(1e-12));
    }
  }
}

TEST_CASE("invariants over random inputs") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mu(-8, 8), lv(-6, 2.5);
  for (const auto& act : all_activations()) {
    for (int i = 0; i < 10'000 / 9; ++i) {
      const double m = mu(rng), v = std::pow(10.0, lv(rng));
      const auto out = propagate(act, {m, v});
      CHECK(out.var_z >= 0.0);
      CHECK(std::abs(out.cov_az) <= std::sqrt(out.var_z * v) + 1e-9);
      if (act.bounded_unit()) {
        CHECK(out.mean_z >= 0.0);
        CHECK(out.mean_z <= 1.0);
        CHECK(out.var_z <= 0.25 + 1e-12);
      }
    }
  }
}

TEST_CASE("degenerate variance continuity") {
  for (const auto& act : all_activations()) {
    for (double m : {-1.3, 0.4, 2.0}) {
      const auto exact = propagate(act, {m, 0.0});
      CHECK(exact.mean_z == act.modeled(m));
      CHECK(exact.var_z == 0.0);
      CHECK(exact.cov_az == 0.0);
      const auto near = propagate(act, {m, 1e-12});
      CHECK(near.mean_z == doctest::Approx(exact.mean_z).epsilon(1e-5));
      CHECK(near.var_z <= 1e-10);
      CHECK(std::abs(near.cov_az) <= 1e-10);
    }
  }
  const auto kink = propagate(Activation::relu(), {0.0, 0.0});
  CHECK(kink.mean_z == 0.0);
  CHECK(kink.var_z == 0.0);
}

TEST_CASE("contract errors and parsing") {
  CHECK_THROWS_AS(propagate(Activation::relu(), {0.0, -1.0}), ContractError);
  CHECK_THROWS_AS(propagate(Activation::relu(), {std::numeric_limits<double>::quiet_NaN(), 1.0}), ContractError);
  CHECK_THROWS_AS(Activation::piecewise_linear(1.5, 1.0), ConfigError);
  CHECK_THROWS_AS(Activation::piecewise_linear(0.5, 0.2), ConfigError);
  CHECK_THROWS_AS(Activation::parse("softmax"), ConfigError);
  for (const auto& act : all_activations()) CHECK(Activation::parse(act.name()) == act);
  CHECK(Activation::parse("relu") == Activation::relu());
  CHECK(Activation::parse("leaky_relu:0.1") == Activation::piecewise_linear(0.1, 1.0));
  CHECK(Activation::parse("identity") == Activation::linear());
}
