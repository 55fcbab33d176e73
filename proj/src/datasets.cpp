#include "kbnn/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "kbnn/error.hpp"
#include "kbnn/rng.hpp"

namespace kbnn {

AffineStats column_stats(const Matrix& m) {
  AffineStats s;
  if (m.rows() == 0) return AffineStats::identity(m.cols());
  s.mean = m.colwise().mean().transpose();
  s.std.resize(m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double var = (m.col(c).array() - s.mean(c)).square().mean();
    const double sd = std::sqrt(var);
    s.std(c) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Matrix standardize_rows(const Matrix& m, const AffineStats& stats) {
  return (m.rowwise() - stats.mean.transpose()).array().rowwise() / stats.std.transpose().array();
}

Matrix destandardize_rows(const Matrix& m, const AffineStats& stats) {
  return (m.array().rowwise() * stats.std.transpose().array()).matrix().rowwise() +
         stats.mean.transpose();
}

namespace {

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

DatasetSplit make_split(const Dataset& data, const SplitOptions& options, std::uint64_t seed) {
  if (data.x.rows() != data.y.rows()) throw DimensionError("make_split: x and y row counts differ");
  if (!(options.test_fraction >= 0.0 && options.test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in [0, 1)");
  }
  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng = make_stream(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_test = static_cast<Eigen::Index>(std::llround(options.test_fraction * static_cast<double>(n)));
  std::vector<Eigen::Index> test(order.begin(), order.begin() + n_test);
  std::vector<Eigen::Index> train(order.begin() + n_test, order.end());

  const Matrix train_x = take_rows(data.x, train);
  const Matrix train_y = take_rows(data.y, train);
  DatasetSplit split;
  split.classification = options.classification;
  split.feature_stats = options.standardize_features ? column_stats(train_x)
                                                     : AffineStats::identity(data.x.cols());
  split.target_stats = options.standardize_targets && !options.classification
                           ? column_stats(train_y)
                           : AffineStats::identity(data.y.cols());
  split.train_x = standardize_rows(train_x, split.feature_stats);
  split.train_y = standardize_rows(train_y, split.target_stats);
  split.test_x = standardize_rows(take_rows(data.x, test), split.feature_stats);
  split.test_y = standardize_rows(take_rows(data.y, test), split.target_stats);
  return split;
}

Dataset gen_cubic_data(const CubicSpec& spec, std::uint64_t seed) {
  if (spec.n < 1) throw ConfigError("cubic: n must be positive");
  if (spec.noise_std < 0.0) throw ConfigError("cubic: noise_std must be non-negative");
  Rng rng = make_stream(seed, "noise");
  std::uniform_real_distribution<double> uniform(spec.x_min, spec.x_max);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset data{Matrix(spec.n, 1), Matrix(spec.n, 1)};
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    const double x = uniform(rng);
    data.x(i, 0) = x;
    data.y(i, 0) = x * x * x + spec.noise_std * noise(rng);
  }
  return data;
}

DatasetSplit gen_cubic(const CubicSpec& spec, std::uint64_t seed) {
  SplitOptions opts;
  opts.test_fraction = spec.test_fraction;
  return make_split(gen_cubic_data(spec, seed), opts, seed);
}

Dataset gen_moons(Eigen::Index n, double noise_std, std::uint64_t seed) {
  if (n < 2) throw ConfigError("moons: n must be at least 2");
  if (noise_std < 0.0) throw ConfigError("moons: noise_std must be non-negative");
  const Eigen::Index n_outer = n / 2;
  const Eigen::Index n_inner = n - n_outer;
  Dataset data{Matrix(n, 2), Matrix(n, 1)};
  auto grid = [](Eigen::Index i, Eigen::Index count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
  };
  for (Eigen::Index i = 0; i < n_outer; ++i) {
    const double t = grid(i, n_outer);
    data.x.row(i) << std::cos(t), std::sin(t);
    data.y(i, 0) = 0.0;
  }
  for (Eigen::Index i = 0; i < n_inner; ++i) {
    const double t = grid(i, n_inner);
    data.x.row(n_outer + i) << 1.0 - std::cos(t), 1.0 - std::sin(t) - 0.5;
    data.y(n_outer + i, 0) = 1.0;
  }
  if (noise_std > 0.0) {
    Rng rng = make_stream(seed, "noise");
    std::normal_distribution<double> noise(0.0, noise_std);
    for (Eigen::Index i = 0; i < n; ++i) {
      data.x(i, 0) += noise(rng);
      data.x(i, 1) += noise(rng);
    }
  }
  return data;
}

Dataset gen_circles(Eigen::Index n, double noise_std, double radius_factor, std::uint64_t seed) {
  if (n < 2) throw ConfigError("circles: n must be at least 2");
  if (noise_std < 0.0) throw ConfigError("circles: noise_std must be non-negative");
  if (!(radius_factor > 0.0 && radius_factor < 1.0)) throw ConfigError("circles: radius factor must lie in (0, 1)");
  const Eigen::Index n_outer = n / 2;
  const Eigen::Index n_inner = n - n_outer;
  Dataset data{Matrix(n, 2), Matrix(n, 1)};
  for (Eigen::Index i = 0; i < n_outer; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_outer);
    data.x.row(i) << std::cos(t), std::sin(t);
    data.y(i, 0) = 0.0;
  }
  for (Eigen::Index i = 0; i < n_inner; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_inner);
    data.x.row(n_outer + i) << radius_factor * std::cos(t), radius_factor * std::sin(t);
    data.y(n_outer + i, 0) = 1.0;
  }
  if (noise_std > 0.0) {
    Rng rng = make_stream(seed, "noise");
    std::normal_distribution<double> noise(0.0, noise_std);
    for (Eigen::Index i = 0; i < n; ++i) {
      data.x(i, 0) += noise(rng);
      data.x(i, 1) += noise(rng);
    }
  }
  return data;
}

Matrix rotate_points(const Matrix& points, double degrees, const Vector& center) {
  if (points.cols() != 2 || center.size() != 2) throw DimensionError("rotate_points: expected 2-D points");
  const double rad = degrees * std::numbers::pi / 180.0;
  Eigen::Matrix2d rot;
  rot << std::cos(rad), -std::sin(rad), std::sin(rad), std::cos(rad);
  const Matrix centered = points.rowwise() - center.transpose();
  return (centered * rot.transpose()).rowwise() + center.transpose();
}

Matrix rotate_moons(const Matrix& points, double degrees) {
  if (points.rows() == 0) return points;
  const Vector centroid = points.colwise().mean().transpose();
  return rotate_points(points, degrees, centroid);
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::size_t resolve_target(const std::vector<std::string>& header, const std::string& target) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == target) return i;
  }
  long long index = 0;
  const auto* end = target.data() + target.size();
  auto [ptr, ec] = std::from_chars(target.data(), end, index);
  if (ec == std::errc() && ptr == end) {
    const auto count = static_cast<long long>(header.size());
    if (index < 0) index += count;
    if (index >= 0 && index < count) return static_cast<std::size_t>(index);
  }
  throw LoadError("target column '" + target + "' not found in header");
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path, const std::string& target) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open CSV file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string() + ": empty file");
  const std::vector<std::string> header = split_line(line);
  const std::size_t target_col = resolve_target(header, target);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw LoadError(path.string() + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, header has " + std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw LoadError(path.string() + ": row " + std::to_string(line_no) + ", column '" + header[c] +
                        "': non-numeric value '" + cell + "'");
      }
      values[c] = v;
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() < 10) {
    throw LoadError(path.string() + ": needs at least 10 data rows, found " + std::to_string(rows.size()));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size()) - 1;
  Dataset data{Matrix(n, d), Matrix(n, 1)};
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index c_out = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const double v = rows[static_cast<std::size_t>(r)][c];
      if (c == target_col) {
        data.y(r, 0) = v;
      } else {
        data.x(r, c_out++) = v;
      }
    }
  }
  return data;
}

DatasetSplit load_csv(const std::filesystem::path& path, const std::string& target, double test_fraction,
                      std::uint64_t seed, bool standardize) {
  SplitOptions opts;
  opts.test_fraction = test_fraction;
  opts.standardize_features = standardize;
  opts.standardize_targets = standardize;
  return make_split(load_csv_dataset(path, target), opts, seed);
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << "x" << c + 1 << ",";
  for (Eigen::Index c = 0; c < data.y.cols(); ++c) out << (c ? ",y" : "y") << (data.y.cols() > 1 ? std::to_string(c + 1) : "");
  out << '\n';
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << data.x(r, c) << ",";
    for (Eigen::Index c = 0; c < data.y.cols(); ++c) out << (c ? "," : "") << data.y(r, c);
    out << '\n';
  }
}

}  // namespace kbnn
