#include "masterface/pca.hpp"

#include <cmath>
#include <sstream>

#include "masterface/errors.hpp"

namespace masterface {

namespace {

// Orthonormal fill-in for rank-deficient data: walk the canonical basis,
// orthogonalize against the columns already present, keep the first vector
// with a solid residual.
void complete_basis(Matrix& components, std::size_t from_col) {
  const std::size_t d = components.rows;
  const std::size_t k = components.cols;
  std::size_t next_canonical = 0;
  for (std::size_t col = from_col; col < k; ++col) {
    while (next_canonical < d) {
      std::vector<double> candidate(d, 0.0);
      candidate[next_canonical] = 1.0;
      ++next_canonical;
      for (std::size_t prev = 0; prev < col; ++prev) {
        double proj = 0.0;
        for (std::size_t r = 0; r < d; ++r) proj += candidate[r] * components(r, prev);
        for (std::size_t r = 0; r < d; ++r) candidate[r] -= proj * components(r, prev);
      }
      const double nrm = norm2(candidate);
      if (nrm > 0.5) {
        for (std::size_t r = 0; r < d; ++r) components(r, col) = candidate[r] / nrm;
        break;
      }
    }
    if (next_canonical > d)
      throw NumericalError("pca_fit: could not complete orthonormal basis");
  }
}

}  // namespace

PcaModel pca_fit(const std::vector<std::vector<double>>& samples, std::size_t k) {
  const std::size_t n = samples.size();
  if (n < 2) throw StructuralError("pca_fit: need at least 2 samples");
  const std::size_t d = samples[0].size();
  if (d == 0) throw StructuralError("pca_fit: empty sample vectors");
  for (const auto& s : samples)
    if (s.size() != d) throw StructuralError("pca_fit: samples have mixed dimensions");
  if (k == 0 || k > std::min(d, n - 1)) {
    std::ostringstream msg;
    msg << "pca_fit: k=" << k << " outside [1, min(d=" << d << ", n-1=" << (n - 1) << ")]";
    throw StructuralError(msg.str());
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const auto& s : samples)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += s[j];
  for (std::size_t j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) = samples[i][j] - model.mean[j];

  model.components = Matrix(d, k);
  model.singular_values.assign(k, 0.0);

  if (d <= n) {
    // Covariance route: eigenvalues are sigma^2 / (n-1).
    Matrix cov(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += centered(r, i) * centered(r, j);
        s /= static_cast<double>(n - 1);
        cov(i, j) = s;
        cov(j, i) = s;
      }
    const SymEigenResult eig = sym_eig(cov);
    const double lead = std::max(eig.eigenvalues[0], 0.0);
    std::size_t filled = 0;
    for (std::size_t col = 0; col < k; ++col) {
      const double lambda = eig.eigenvalues[col];
      if (lambda <= 0.0 || lambda <= 1e-12 * lead) break;
      model.singular_values[col] = std::sqrt(lambda * static_cast<double>(n - 1));
      for (std::size_t row = 0; row < d; ++row)
        model.components(row, col) = eig.vectors(row, col);
      ++filled;
    }
    complete_basis(model.components, filled);
  } else {
    // Gram route: G = X X^T, eigenvalues are sigma^2.
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += centered(i, c) * centered(j, c);
        gram(i, j) = s;
        gram(j, i) = s;
      }
    const SymEigenResult eig = sym_eig(gram);
    const double lead = std::max(eig.eigenvalues[0], 0.0);
    std::size_t filled = 0;
    for (std::size_t col = 0; col < k; ++col) {
      const double gamma = eig.eigenvalues[col];
      if (gamma <= 0.0 || gamma <= 1e-12 * lead) break;
      const double sigma = std::sqrt(gamma);
      model.singular_values[col] = sigma;
      // v = X^T u / sigma
      for (std::size_t row = 0; row < d; ++row) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += centered(r, row) * eig.vectors(r, col);
        model.components(row, col) = s / sigma;
      }
      // renormalize to keep the column exactly unit against rounding
      double nrm = 0.0;
      for (std::size_t row = 0; row < d; ++row)
        nrm += model.components(row, col) * model.components(row, col);
      nrm = std::sqrt(nrm);
      if (nrm > 0.0)
        for (std::size_t row = 0; row < d; ++row) model.components(row, col) /= nrm;
      ++filled;
    }
    complete_basis(model.components, filled);
  }
  return model;
}

std::vector<double> project(const PcaModel& model, const std::vector<double>& x) {
  const std::size_t d = model.input_dim();
  const std::size_t k = model.component_count();
  if (x.size() != d) throw StructuralError("project: input dimension mismatch");
  std::vector<double> y(k, 0.0);
  for (std::size_t col = 0; col < k; ++col) {
    double s = 0.0;
    for (std::size_t row = 0; row < d; ++row)
      s += (x[row] - model.mean[row]) * model.components(row, col);
    y[col] = s;
  }
  return y;
}

std::vector<double> reconstruct(const PcaModel& model, const std::vector<double>& y) {
  const std::size_t d = model.input_dim();
  const std::size_t k = model.component_count();
  if (y.size() != k) throw StructuralError("reconstruct: latent dimension mismatch");
  std::vector<double> x = model.mean;
  for (std::size_t col = 0; col < k; ++col) {
    const double yc = y[col];
    if (yc == 0.0) continue;
    for (std::size_t row = 0; row < d; ++row) x[row] += yc * model.components(row, col);
  }
  return x;
}

}  // namespace masterface
