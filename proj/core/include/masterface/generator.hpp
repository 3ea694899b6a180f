#pragma once

#include <cstddef>
#include <vector>

#include "masterface/data.hpp"
#include "masterface/image.hpp"
#include "masterface/pca.hpp"

namespace masterface {

using LatentVector = std::vector<double>;

// Eigenface decoder: maps a k-dimensional latent to a face image through a
// PCA basis fit on training images. Latent axis c is scaled by
// singular_values[c]/sqrt(n_train) so a standard-normal latent reproduces
// the training data's variance along each component.
struct EigenfaceDecoder {
  PcaModel pca;
  std::size_t latent_dim = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> latent_scales;    // length latent_dim
  std::vector<double> train_residuals;  // per training image, L2 truncation error
};

EigenfaceDecoder train_decoder(const Gallery& gallery, Split split, std::size_t k);

FaceImage generate(const EigenfaceDecoder& decoder, const LatentVector& z);

std::vector<FaceImage> batch_generate(const EigenfaceDecoder& decoder,
                                      const std::vector<LatentVector>& zs);

}  // namespace masterface
