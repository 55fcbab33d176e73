#include "kbnn/gaussian.hpp"

#include <algorithm>
#include <string>

#include "kbnn/error.hpp"

namespace kbnn {

namespace {

void require_square(const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(op) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

Matrix floor_diagonal(Matrix m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, i) = floor_variance(m(i, i));
  return m;
}

}  // namespace

Matrix symmetrize(const Matrix& m) {
  require_square(m, "symmetrize");
  return 0.5 * (m + m.transpose());
}

Matrix spd_solve(const Matrix& a, const Matrix& b) {
  require_square(a, "spd_solve");
  if (b.rows() != a.rows()) {
    throw DimensionError("spd_solve: right-hand side has " + std::to_string(b.rows()) +
                         " rows, matrix is " + std::to_string(a.rows()));
  }
  const Eigen::Index k = a.rows();
  double jitter = 0.0;
  for (double next = 1e-12;; next *= 100.0) {
    Eigen::LLT<Matrix> llt(a + jitter * Matrix::Identity(k, k));
    if (llt.info() == Eigen::Success) {
      Matrix x = llt.solve(b);
      if (x.allFinite()) return x;
    }
    if (next > kMaxJitter * 1.5) break;
    jitter = std::min(next, kMaxJitter);
  }
  throw SingularMatrixError("spd_solve: factorization failed with jitter " + std::to_string(jitter),
                            jitter);
}

bool is_psd(const Matrix& m) {
  if (m.rows() != m.cols() || !m.allFinite()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(m.diagonal().cwiseAbs().maxCoeff(), 1.0);
  // Rank-deficient input reports NumericalIssue on a rounding-level pivot, so
  // only the pivots themselves are inspected.
  Eigen::LDLT<Matrix> ldlt(m);
  const Vector d = ldlt.vectorD();
  return d.allFinite() && d.minCoeff() >= -1e-12 * scale;
}

Matrix clamp_psd(const Matrix& m) {
  require_square(m, "clamp_psd");
  if (m.size() == 0) return m;
  if (is_psd(m)) return floor_diagonal(m);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
  Matrix rebuilt = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return floor_diagonal(symmetrize(rebuilt));
}

}  // namespace kbnn
