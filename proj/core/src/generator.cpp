#include "masterface/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "masterface/errors.hpp"

namespace masterface {

EigenfaceDecoder train_decoder(const Gallery& gallery, Split split, std::size_t k) {
  std::vector<std::vector<double>> samples;
  std::size_t w = 0, h = 0;
  for (const auto& e : gallery.entries) {
    if (e.split != split) continue;
    if (samples.empty()) {
      w = e.image.width;
      h = e.image.height;
    } else if (e.image.width != w || e.image.height != h) {
      throw StructuralError("train_decoder: mixed image dimensions in training split");
    }
    samples.push_back(e.image.pixels);
  }
  if (samples.size() < k + 1) {
    std::ostringstream msg;
    msg << "train_decoder: need at least k+1=" << (k + 1) << " images, split '"
        << split_name(split) << "' has " << samples.size();
    throw StructuralError(msg.str());
  }

  EigenfaceDecoder d;
  d.pca = pca_fit(samples, k);
  d.latent_dim = k;
  d.width = w;
  d.height = h;
  const double root_n = std::sqrt(static_cast<double>(samples.size()));
  d.latent_scales.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    d.latent_scales[c] = d.pca.singular_values[c] / root_n;

  d.train_residuals.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::vector<double> y = project(d.pca, samples[i]);
    const std::vector<double> rec = reconstruct(d.pca, y);
    double err = 0.0;
    for (std::size_t j = 0; j < rec.size(); ++j) {
      const double diff = rec[j] - samples[i][j];
      err += diff * diff;
    }
    d.train_residuals[i] = std::sqrt(err);
  }
  return d;
}

FaceImage generate(const EigenfaceDecoder& decoder, const LatentVector& z) {
  if (z.size() != decoder.latent_dim)
    throw StructuralError("generate: latent length does not match decoder latent_dim");
  std::vector<double> y(decoder.latent_dim);
  for (std::size_t c = 0; c < y.size(); ++c) y[c] = decoder.latent_scales[c] * z[c];
  std::vector<double> px = reconstruct(decoder.pca, y);
  for (double& v : px) v = std::min(1.0, std::max(0.0, v));
  return FaceImage{decoder.width, decoder.height, std::move(px)};
}

std::vector<FaceImage> batch_generate(const EigenfaceDecoder& decoder,
                                      const std::vector<LatentVector>& zs) {
  std::vector<FaceImage> out;
  out.reserve(zs.size());
  for (const auto& z : zs) out.push_back(generate(decoder, z));
  return out;
}

}  // namespace masterface
