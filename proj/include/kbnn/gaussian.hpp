#pragma once

#include <Eigen/Dense>

namespace kbnn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Smallest variance the library ever divides by or stores on a covariance diagonal.
inline constexpr double kVarianceFloor = 1e-9;

/// Jitter ladder for spd_solve: 0, then 1e-12 growing x100 up to this value.
inline constexpr double kMaxJitter = 1e-4;

struct ScalarGaussian {
  double mean = 0.0;
  double variance = 0.0;
};

struct GaussianVector {
  Vector mean;
  Matrix covariance;

  Eigen::Index size() const { return mean.size(); }
};

/// (M + M^T) / 2. Throws DimensionError for non-square input.
Matrix symmetrize(const Matrix& m);

/// Solves (A + jitter I) X = B with a Cholesky factorization, escalating the
/// jitter on failure. Throws SingularMatrixError once kMaxJitter is exhausted.
Matrix spd_solve(const Matrix& a, const Matrix& b);

/// True when the symmetric matrix admits an LDL^T factorization with a
/// non-negative diagonal (relative tolerance on the pivots).
bool is_psd(const Matrix& m);

/// Projects a symmetric matrix onto the PSD cone and floors its diagonal.
/// Cheap path: when the trial factorization succeeds only the diagonal floor
/// is applied.
Matrix clamp_psd(const Matrix& m);

/// max(v, kVarianceFloor)
inline double floor_variance(double v) { return v < kVarianceFloor ? kVarianceFloor : v; }

}  // namespace kbnn
