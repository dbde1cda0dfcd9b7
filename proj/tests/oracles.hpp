#pragma once

#include "ncs/linalg.hpp"

namespace ncs::testing {

// Scaling-and-squaring Taylor matrix exponential, independent of the
// library's Pade-based path.
inline Matrix expm_taylor(const Matrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  Matrix x = a * scale;
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace ncs::testing
