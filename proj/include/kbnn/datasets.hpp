#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "kbnn/network.hpp"

namespace kbnn {

/// Raw instances, one per row.
struct Dataset {
  Matrix x;
  Matrix y;

  Eigen::Index size() const { return x.rows(); }
};

/// Train/test partition. Matrices hold standardized values; the stats map them
/// back to raw units (identity stats when standardization is off).
struct DatasetSplit {
  Matrix train_x, train_y;
  Matrix test_x, test_y;
  AffineStats feature_stats;
  AffineStats target_stats;
  bool classification = false;

  Eigen::Index input_dim() const { return train_x.cols(); }
  Eigen::Index output_dim() const { return train_y.cols(); }
  Standardizer standardizer() const { return {feature_stats, target_stats}; }
};

struct SplitOptions {
  double test_fraction = 0.1;
  bool standardize_features = true;
  bool standardize_targets = true;
  bool classification = false;
};

/// Column means and population standard deviations; zero deviations become 1.
AffineStats column_stats(const Matrix& m);
Matrix standardize_rows(const Matrix& m, const AffineStats& stats);
Matrix destandardize_rows(const Matrix& m, const AffineStats& stats);

/// Seeded permutation split; stats come from the training rows only.
DatasetSplit make_split(const Dataset& data, const SplitOptions& options, std::uint64_t seed);

struct CubicSpec {
  Eigen::Index n = 800;
  double noise_std = 3.0;
  double x_min = -4.0;
  double x_max = 4.0;
  double test_fraction = 0.1;
};

/// y = x^3 + N(0, noise_std^2), x ~ U[x_min, x_max].
Dataset gen_cubic_data(const CubicSpec& spec, std::uint64_t seed);
DatasetSplit gen_cubic(const CubicSpec& spec, std::uint64_t seed);

/// Two interleaving half circles: class 0 on (cos t, sin t), class 1 on
/// (1 - cos t, 0.5 - sin t), t on a uniform grid over [0, pi], plus isotropic
/// Gaussian noise. Rows are ordered class 0 first.
Dataset gen_moons(Eigen::Index n, double noise_std, std::uint64_t seed);

/// Outer unit circle (class 0) and inner circle of radius `radius_factor` (class 1).
Dataset gen_circles(Eigen::Index n, double noise_std, double radius_factor, std::uint64_t seed);

/// Rotates 2-D points counter-clockwise about `center`.
Matrix rotate_points(const Matrix& points, double degrees, const Vector& center);
/// Rotates 2-D points about their own centroid.
Matrix rotate_moons(const Matrix& points, double degrees);

struct RotatingMoonsSpec {
  Eigen::Index initial_n = 1500;
  Eigen::Index per_step_n = 100;
  int steps = 18;
  double step_degrees = 20.0;
  double noise_std = 0.1;
};

/// Reads a numeric CSV with a header row. `target` is a column name or a
/// (possibly negative) column index. Throws LoadError naming the row/column
/// of a bad cell, a missing target, or fewer than 10 rows.
Dataset load_csv_dataset(const std::filesystem::path& path, const std::string& target);
DatasetSplit load_csv(const std::filesystem::path& path, const std::string& target,
                      double test_fraction, std::uint64_t seed, bool standardize);

/// Writes x columns then y columns with the given header names.
void write_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace kbnn
