#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "masterface/data.hpp"
#include "masterface/image.hpp"
#include "masterface/pca.hpp"

namespace masterface {

// Feature extraction applied before the PCA embedding. kBlock2 (2x2 block
// averages) stands in for an architecturally different recognizer.
enum class FeatureMap { kIdentity, kBlock2 };

const char* feature_map_name(FeatureMap map);
FeatureMap feature_map_from_name(const std::string& name);

struct EmbeddingModel {
  PcaModel pca;
  FeatureMap feature_map = FeatureMap::kIdentity;
  std::size_t width = 0;   // expected input image dimensions
  std::size_t height = 0;
  std::string training_tag;
};

struct Embedding {
  std::vector<double> values;
};

struct MatchScore {
  double value = 0.0;     // cosine similarity in [-1,1]
  bool degenerate = false;  // a zero-norm embedding was involved
};

struct DecisionThreshold {
  double tau = 0.0;
  double eer = 0.0;
  std::string model_tag;        // matcher this threshold was calibrated for
  std::string calibration_tag;  // split used for calibration
};

EmbeddingModel train_matcher(const Gallery& gallery, Split split, std::size_t e,
                             FeatureMap map, const std::string& tag);

Embedding embed(const EmbeddingModel& model, const FaceImage& image);

MatchScore face_matching(const EmbeddingModel& model, const FaceImage& a,
                         const FaceImage& b);

// Cosine similarity of two precomputed embeddings; face_matching(model, a, b)
// is exactly embedding_similarity(embed(model, a), embed(model, b)).
MatchScore embedding_similarity(const Embedding& a, const Embedding& b);

// All genuine (same identity, distinct images) and zero-effort imposter
// (cross-identity) pair scores of a split, in deterministic order.
struct PairScores {
  std::vector<double> genuine;
  std::vector<double> imposter;
};
PairScores split_pair_scores(const EmbeddingModel& model, const Gallery& gallery,
                             Split split);

// Equal-error-rate operating point of two score populations, acceptance rule
// score >= tau. Linear interpolation at the FAR/FRR crossing; perfectly
// separated populations give the gap midpoint with eer = 0.
struct EerResult {
  double tau = 0.0;
  double eer = 0.0;
};
EerResult eer_threshold(const std::vector<double>& genuine,
                        const std::vector<double>& imposter);

DecisionThreshold calibrate_threshold(const EmbeddingModel& model,
                                      const Gallery& gallery, Split dev_split);

}  // namespace masterface
