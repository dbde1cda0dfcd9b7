#pragma once

#include <Eigen/Dense>

namespace ncs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Largest |eigenvalue| of a (possibly non-symmetric) real matrix.
double spectral_radius(const Matrix& m);

/// Eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& m);

/// Clip the eigenvalues of a symmetric matrix from below.
Matrix clip_eigenvalues_min(const Matrix& m, double floor);

}  // namespace ncs
