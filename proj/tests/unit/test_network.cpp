#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "kbnn/error.hpp"
#include "kbnn/network.hpp"

using namespace kbnn;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("kbnn_test_network_" + name);
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("init_network shapes") {
  const auto net = init_network({2, 10, 10, 1}, parse_activations("relu,relu,sigmoid"), {}, 1);
  REQUIRE(net.layers.size() == 3);
  CHECK(net.layers[0].width() == 10);
  CHECK(net.layers[1].width() == 10);
  CHECK(net.layers[2].width() == 1);
  CHECK(net.layers[0].fan_in == 2);
  CHECK(net.layers[1].fan_in == 10);
  CHECK(net.layers[2].fan_in == 10);
  CHECK(net.layers[2].activation == Activation::sigmoid());
  CHECK(net.input_dim == 2);
  CHECK(net.output_dim == 1);
  CHECK(net.architecture() == std::vector<Eigen::Index>{2, 10, 10, 1});

  const auto cubic = init_network({1, 100, 1}, parse_activations("relu,linear"), {}, 1);
  CHECK(cubic.layers[0].neurons[0].mean.size() == 2);
  CHECK(cubic.layers[1].neurons[0].mean.size() == 101);
  CHECK(cubic.layers[1].neurons[0].covariance == Matrix::Identity(101, 101));

  const auto wide = init_network({3, 4, 2}, parse_activations("tanh,linear"), PriorSpec{0.25}, 9);
  CHECK(wide.layers[0].neurons[3].covariance == 0.25 * Matrix::Identity(4, 4));
}

TEST_CASE("init_network is deterministic in the seed") {
  const auto acts = parse_activations("relu,linear");
  const auto a = init_network({3, 7, 2}, acts, {}, 42);
  const auto b = init_network({3, 7, 2}, acts, {}, 42);
  const auto c = init_network({3, 7, 2}, acts, {}, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("init_network prior mean scale") {
  const auto net = init_network({99, 400, 1}, parse_activations("relu,linear"), {}, 5);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& neuron : net.layers[0].neurons) {
    sum += neuron.mean.sum();
    sq += neuron.mean.squaredNorm();
    n += static_cast<std::size_t>(neuron.mean.size());
  }
  const double var = sq / static_cast<double>(n) - (sum / static_cast<double>(n)) * (sum / static_cast<double>(n));
  CHECK(var == doctest::Approx(1.0 / 100.0).epsilon(0.05));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(init_network({2}, {}, {}, 0), ConfigError);
  CHECK_THROWS_AS(init_network({2, 3, 1}, parse_activations("relu"), {}, 0), ConfigError);
  CHECK_THROWS_AS(init_network({2, 0, 1}, parse_activations("relu,linear"), {}, 0), ConfigError);
  CHECK_THROWS_AS(init_network({2, 3, 1}, parse_activations("relu,linear"), PriorSpec{0.0}, 0), ConfigError);
  CHECK_THROWS_AS(parse_architecture("2,x,1"), ConfigError);
  CHECK_THROWS_AS(parse_architecture(""), ConfigError);
  CHECK(parse_architecture("2,10,10,1") == std::vector<Eigen::Index>{2, 10, 10, 1});
}

TEST_CASE("parameter_count") {
  const auto net = init_network({2, 10, 10, 1}, parse_activations("relu,relu,sigmoid"), {}, 1);
  const std::size_t expected = 10 * 3 + 10 * 9 + 10 * 11 + 10 * 121 + 1 * 11 + 1 * 121;
  CHECK(parameter_count(net) == expected);
}

TEST_CASE("save and load round trip exactly") {
  auto net = init_network({3, 5, 2}, parse_activations("leaky_relu:0.1,sigmoid"), PriorSpec{0.7}, 3);
  net.layers[0].neurons[1].covariance(0, 1) = net.layers[0].neurons[1].covariance(1, 0) = 0.1 / 3.0;
  Standardizer s{{Vector::Constant(3, 1.0 / 7.0), Vector::Constant(3, 2.5)}, {Vector::Constant(2, -4.0), Vector::Constant(2, 1e-3)}};
  net.standardizer = s;
  const auto path = temp_file("roundtrip.json");
  save_model(net, path);
  const auto loaded = load_model(path);
  CHECK(loaded == net);
  CHECK(to_json_string(loaded) == to_json_string(net));
  CHECK(read_all(path).find(kModelFormat) != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("load errors") {
  const auto net = init_network({2, 2, 1}, parse_activations("relu,linear"), {}, 3);
  const std::string text = to_json_string(net);
  const auto path = temp_file("bad.json");

  write_all(path, text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(path), LoadError);

  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find(kModelFormat), std::string(kModelFormat).size(), "kbnn-model-v9");
  write_all(path, wrong_version);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("format"), LoadError);

  auto bad = net;
  bad.layers[0].neurons[1].covariance(2, 2) = -1.0;
  write_all(path, to_json_string(bad));
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("layers[0].neurons[1].covariance"), LoadError);

  auto short_mean = net;
  short_mean.layers[1].neurons[0].mean.conservativeResize(2);
  CHECK_THROWS_AS(from_json_string(to_json_string(short_mean)), LoadError);

  CHECK_THROWS_AS(load_model(temp_file("missing.json")), LoadError);
  std::filesystem::remove(path);
}

TEST_CASE("validate catches inconsistent shapes") {
  auto net = init_network({2, 3, 1}, parse_activations("relu,linear"), {}, 0);
  CHECK_NOTHROW(validate(net));
  net.layers[1].fan_in = 4;
  CHECK_THROWS_AS(validate(net), ConfigError);
}

TEST_CASE("affine stats") {
  AffineStats s{Vector::Constant(2, 3.0), Vector::Constant(2, 2.0)};
  Vector raw(2);
  raw << 1.0, 7.0;
  CHECK(s.standardize(raw)(1) == 2.0);
  CHECK((s.destandardize(s.standardize(raw)) - raw).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(AffineStats::identity(2).standardize(raw) == raw);
}
