#ifndef MASTERFACE_MATRIX_HPP_
#define MASTERFACE_MATRIX_HPP_

#include <cstddef>
#include <vector>

namespace masterface {

// Dense row-major matrix of doubles. Just enough linear algebra for the
// optimizer, the eigenface decoder, and the embedding models.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix& other) const = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// y = A x
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& v);

// Eigendecomposition of a symmetric matrix. Eigenvalues descending,
// eigenvectors unit-norm in the corresponding columns of `vectors`.
struct SymEigenResult {
  std::vector<double> eigenvalues;
  Matrix vectors;
};

// Cyclic Jacobi rotations; converges when the off-diagonal norm drops below
// 1e-12 of the Frobenius norm, capped at 100 sweeps.
// Throws StructuralError for non-square or asymmetric input (tolerance 1e-9),
// NumericalError (naming the residual) if the cap is hit.
SymEigenResult sym_eig(const Matrix& a);

}  // namespace masterface

#endif  // MASTERFACE_MATRIX_HPP_
