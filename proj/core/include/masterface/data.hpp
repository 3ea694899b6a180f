#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "masterface/image.hpp"

namespace masterface {

enum class Split { kWorld, kDev, kEval };

const char* split_name(Split split);
Split split_from_name(const std::string& name);

struct GalleryEntry {
  std::string identity;
  Split split = Split::kWorld;
  FaceImage image;
};

// Enrolled templates plus probes, partitioned into identity-disjoint splits.
// Entry order is construction order; the first-listed image of each identity
// is its enrollment template.
struct Gallery {
  std::vector<GalleryEntry> entries;

  std::size_t identity_count(Split split) const;
  std::size_t image_count(Split split) const;
};

// Parameters of the synthetic face population.
struct SynthSpec {
  std::size_t identities = 50;
  std::size_t images_per_identity = 12;
  std::size_t width = 32;
  std::size_t height = 32;
  double identity_scale = 0.075;  // std of identity-center offsets
  double intra_noise = 0.015;     // std of per-image perturbation
  std::uint64_t seed = 1;
};

// Deterministic synthetic gallery: smooth low-frequency face prototypes per
// identity plus per-image perturbations, split 60/20/20 by seeded shuffle.
Gallery synth_gallery(const SynthSpec& spec);

// Binary 8-bit PGM ("P5") image I/O. Pixel bytes map linearly to [0,1].
FaceImage read_pgm(const std::string& path);
void write_pgm(const FaceImage& image, const std::string& path,
               const std::string& comment = "");

// CSV manifest (`identity,split,path`, paths relative to the manifest file).
Gallery load_manifest(const std::string& path);
std::string write_manifest(const Gallery& gallery, const std::string& dir,
                           const std::string& comment = "");

// One enrollment image per identity of the split, identity label ascending.
std::vector<std::pair<std::string, FaceImage>> enrolled_templates(
    const Gallery& gallery, Split split);

// Throws StructuralError if splits share an identity or dimensions vary.
void validate_gallery(const Gallery& gallery);

}  // namespace masterface
