#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace masterface {

// Grayscale raster with pixel values in [0,1], row-major.
struct FaceImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  double operator()(std::size_t row, std::size_t col) const {
    return pixels[row * width + col];
  }
  double& operator()(std::size_t row, std::size_t col) {
    return pixels[row * width + col];
  }

  bool operator==(const FaceImage&) const = default;
};

// Content hash of dimensions plus raw pixel bytes, as lowercase hex.
std::string image_digest(const FaceImage& image);

}  // namespace masterface
