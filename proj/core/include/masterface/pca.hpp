#ifndef MASTERFACE_PCA_HPP_
#define MASTERFACE_PCA_HPP_

#include <vector>

#include "masterface/matrix.hpp"

namespace masterface {

// Principal component model: `components` holds k orthonormal columns of
// length d; `singular_values` are the singular values of the centered sample
// matrix, descending.
struct PcaModel {
  std::vector<double> mean;
  Matrix components;  // d x k
  std::vector<double> singular_values;

  std::size_t input_dim() const { return components.rows; }
  std::size_t component_count() const { return components.cols; }
};

// Top-k principal directions of the centered samples. Uses the d x d
// covariance when d <= n, otherwise the n x n Gram matrix. Directions of
// (numerically) zero variance are filled with an orthonormal completion and
// get singular value 0.
PcaModel pca_fit(const std::vector<std::vector<double>>& samples, std::size_t k);

std::vector<double> project(const PcaModel& model, const std::vector<double>& x);
std::vector<double> reconstruct(const PcaModel& model, const std::vector<double>& y);

}  // namespace masterface

#endif  // MASTERFACE_PCA_HPP_
