#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "kbnn/datasets.hpp"
#include "kbnn/error.hpp"

using namespace kbnn;

namespace {

std::filesystem::path data_dir() { return KBNN_TEST_DATA_DIR; }

std::filesystem::path temp_csv(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / ("kbnn_test_datasets_" + name);
  std::ofstream(p) << text;
  return p;
}

std::string numeric_rows(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += std::to_string(i) + "," + std::to_string(2 * i) + "," + std::to_string(i % 3) + "\n";
  return s;
}

}  // namespace

TEST_CASE("cubic generator") {
  CubicSpec spec;
  spec.noise_std = 0.0;
  spec.n = 50;
  const auto clean = gen_cubic_data(spec, 1);
  for (Eigen::Index i = 0; i < clean.size(); ++i) {
    CHECK(clean.y(i, 0) == clean.x(i, 0) * clean.x(i, 0) * clean.x(i, 0));
    CHECK(clean.x(i, 0) >= -4.0);
    CHECK(clean.x(i, 0) <= 4.0);
  }

  CubicSpec noisy;
  const auto data = gen_cubic_data(noisy, 2);
  CHECK(data.size() == 800);
  const Vector resid = data.y.col(0) - data.x.col(0).array().cube().matrix();
  const double var = (resid.array() - resid.mean()).square().sum() / 799.0;
  CHECK(var == doctest::Approx(9.0).epsilon(1.5 / 9.0));

  const auto again = gen_cubic_data(noisy, 2);
  CHECK(again.x == data.x);
  CHECK(again.y == data.y);

  const auto split = gen_cubic(noisy, 3);
  CHECK(split.train_x.rows() == 720);
  CHECK(split.test_x.rows() == 80);
  CHECK_THROWS_AS(gen_cubic_data(CubicSpec{0}, 1), ConfigError);
}

TEST_CASE("moons generator") {
  const auto m = gen_moons(1500, 0.0, 1);
  CHECK(m.size() == 1500);
  CHECK(m.x(0, 0) == 1.0);
  CHECK(m.x(0, 1) == 0.0);
  CHECK(m.x(750, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(m.x(750, 1) == 0.5);
  CHECK(m.y.col(0).sum() == 750.0);
  CHECK(m.y(749, 0) == 0.0);
  CHECK(m.y(750, 0) == 1.0);
  CHECK(m.x(749, 0) == doctest::Approx(-1.0));

  const auto a = gen_moons(200, 0.1, 5);
  const auto b = gen_moons(200, 0.1, 5);
  CHECK(a.x == b.x);
  CHECK_FALSE(a.x == gen_moons(200, 0.1, 6).x);
  CHECK_THROWS_AS(gen_moons(100, -1.0, 0), ConfigError);
}

TEST_CASE("circles generator") {
  const auto c = gen_circles(100, 0.0, 0.8, 1);
  CHECK(c.x(0, 0) == 1.0);
  CHECK(c.x(0, 1) == 0.0);
  CHECK(c.x(50, 0) == doctest::Approx(0.8));
  CHECK(c.x(50, 1) == 0.0);
  CHECK(c.y.col(0).sum() == 50.0);
  for (Eigen::Index i = 0; i < 50; ++i) CHECK(c.x.row(i).norm() == doctest::Approx(1.0));
  CHECK(gen_circles(100, 0.05, 0.8, 3).x == gen_circles(100, 0.05, 0.8, 3).x);
  CHECK_THROWS_AS(gen_circles(100, 0.0, 1.2, 1), ConfigError);
}

TEST_CASE("rotation") {
  const auto m = gen_moons(300, 0.1, 2).x;
  CHECK((rotate_moons(m, 360.0) - m).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((rotate_moons(rotate_moons(m, 180.0), 180.0) - rotate_moons(m, 360.0)).cwiseAbs().maxCoeff() <= 1e-12);
  Matrix r = m;
  for (int i = 0; i < 18; ++i) r = rotate_moons(r, 20.0);
  CHECK((r - m).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix p(1, 2);
  p << 1.0, 0.0;
  const Matrix q = rotate_points(p, 90.0, Vector::Zero(2));
  CHECK(q(0, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(q(0, 1) == doctest::Approx(1.0));
  const Vector centroid = m.colwise().mean().transpose();
  CHECK((rotate_moons(m, 37.0).colwise().mean().transpose() - centroid).norm() <= 1e-12);
}

TEST_CASE("split invariants") {
  const auto data = gen_cubic_data(CubicSpec{}, 4);
  const auto s = make_split(data, {}, 9);
  CHECK(s.train_x.rows() + s.test_x.rows() == data.size());
  CHECK(s.test_x.rows() == 80);
  CHECK(std::abs(s.train_x.col(0).mean()) <= 1e-8);
  CHECK(std::abs(std::sqrt((s.train_x.col(0).array() - s.train_x.col(0).mean()).square().mean()) - 1.0) <= 1e-8);
  CHECK(std::abs(s.train_y.col(0).mean()) <= 1e-8);

  std::set<double> seen;
  const Matrix raw_train = destandardize_rows(s.train_x, s.feature_stats);
  const Matrix raw_test = destandardize_rows(s.test_x, s.feature_stats);
  for (Eigen::Index i = 0; i < raw_train.rows(); ++i) seen.insert(std::round(raw_train(i, 0) * 1e9));
  for (Eigen::Index i = 0; i < raw_test.rows(); ++i) seen.insert(std::round(raw_test(i, 0) * 1e9));
  CHECK(seen.size() == static_cast<std::size_t>(data.size()));

  const auto again = make_split(data, {}, 9);
  CHECK(again.train_x == s.train_x);
  CHECK(again.test_y == s.test_y);
  CHECK_FALSE(make_split(data, {}, 10).train_x == s.train_x);

  const Matrix back = destandardize_rows(s.train_y, s.target_stats);
  CHECK((standardize_rows(back, s.target_stats) - s.train_y).cwiseAbs().maxCoeff() <= 1e-10);

  SplitOptions cls;
  cls.classification = true;
  const auto moons = make_split(gen_moons(100, 0.1, 1), cls, 1);
  CHECK(moons.target_stats == AffineStats::identity(1));
  CHECK_THROWS_AS(make_split(data, SplitOptions{1.0}, 1), ConfigError);
}

TEST_CASE("boston csv") {
  const auto path = data_dir() / "boston.csv";
  const auto data = load_csv_dataset(path, "MEDV");
  CHECK(data.size() == 506);
  CHECK(data.x.cols() == 13);
  const auto by_index = load_csv_dataset(path, "-1");
  CHECK(by_index.y == data.y);
  const auto split = load_csv(path, "MEDV", 0.1, 1, true);
  CHECK(split.train_x.rows() + split.test_x.rows() == 506);
  CHECK(split.test_x.rows() == 51);
}

TEST_CASE("csv errors") {
  const auto nan = temp_csv("nan.csv", "a,b,c\n" + numeric_rows(5) + "1,nan,2\n" + numeric_rows(6));
  CHECK_THROWS_WITH_AS(load_csv_dataset(nan, "c"), doctest::Contains("row 7, column 'b'"), LoadError);
  const auto text = temp_csv("text.csv", "a,b,c\n" + numeric_rows(5) + "1,2,abc\n" + numeric_rows(6));
  CHECK_THROWS_WITH_AS(load_csv_dataset(text, "c"), doctest::Contains("column 'c'"), LoadError);
  const auto ok = temp_csv("ok.csv", "a,b,c\n" + numeric_rows(12));
  CHECK_THROWS_WITH_AS(load_csv_dataset(ok, "target"), doctest::Contains("target"), LoadError);
  CHECK(load_csv_dataset(ok, "b").x.cols() == 2);
  CHECK(load_csv_dataset(ok, "0").y(3, 0) == 3.0);
  const auto tiny = temp_csv("tiny.csv", "a,b,c\n" + numeric_rows(9));
  CHECK_THROWS_WITH_AS(load_csv_dataset(tiny, "c"), doctest::Contains("at least 10"), LoadError);
  CHECK_THROWS_AS(load_csv_dataset("/nonexistent/file.csv", "c"), LoadError);
  const auto constant = temp_csv("const.csv", "a,b,c\n" + numeric_rows(12));
  const auto s = load_csv(constant, "b", 0.0, 1, true);
  CHECK(s.feature_stats.std.allFinite());
  for (const auto& p : {nan, text, ok, tiny, constant}) std::filesystem::remove(p);
}

TEST_CASE("csv round trip") {
  const auto data = gen_moons(20, 0.1, 1);
  const auto path = std::filesystem::temp_directory_path() / "kbnn_test_datasets_roundtrip.csv";
  write_csv(path, data);
  const auto back = load_csv_dataset(path, "y");
  CHECK(back.x == data.x);
  CHECK(back.y == data.y);
  std::filesystem::remove(path);
}
