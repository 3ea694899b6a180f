#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "masterface/cmaes.hpp"
#include "masterface/data.hpp"
#include "masterface/generator.hpp"
#include "masterface/matcher.hpp"
#include "masterface/rng.hpp"

namespace masterface {

struct LveConfig {
  std::size_t population = 22;  // candidates per iteration
  std::size_t iterations = 1;
  std::size_t latent_dim = 64;
  double sigma0 = 0.3;
  std::uint64_t seed = 0;
  std::string matcher_tag;  // matcher scoring the candidates
  Split score_target_split = Split::kWorld;  // templates the attack optimizes against
};

struct MasterFaceRecord {
  LatentVector latent;
  double mean_score = 0.0;
  std::size_t iteration = 0;
  std::string image_digest;
};

struct RunLogRow {
  std::size_t iteration = 0;
  double best_score = 0.0;
  double train_fmr = 0.0;
  double elapsed_ms = 0.0;
};

struct RunLog {
  std::vector<RunLogRow> rows;
};

struct LveResult {
  RunLog log;
  std::vector<MasterFaceRecord> per_iteration;  // local best of each iteration
  MasterFaceRecord global_best;
};

// Arithmetic mean of face_matching(face, template) over enrolled templates.
double mean_score(const FaceImage& face,
                  const std::vector<std::pair<std::string, FaceImage>>& templates,
                  const EmbeddingModel& model);

// Same mean with the template embeddings precomputed; bit-identical to the
// image-list form because face_matching is cosine over the same embeddings.
double mean_score(const FaceImage& face, const std::vector<Embedding>& templates,
                  const EmbeddingModel& model);

// Argmax by score; ties go to the lowest index.
std::pair<std::size_t, double> get_best_face(const std::vector<FaceImage>& faces,
                                             const std::vector<double>& scores);

// Drives CMA-ES over the decoder's latent space to maximize the mean match
// score against the world split's enrolled templates. Snapshots capture the
// full state; a restored driver continues bit-identically.
class LveDriver {
 public:
  LveDriver(const LveConfig& config, const EigenfaceDecoder& decoder,
            const EmbeddingModel& model, const DecisionThreshold& threshold,
            const Gallery& gallery);
  LveDriver(const nlohmann::json& snapshot, const LveConfig& config,
            const EigenfaceDecoder& decoder, const EmbeddingModel& model,
            const DecisionThreshold& threshold, const Gallery& gallery);

  std::size_t iteration() const { return rows_.size(); }
  bool done() const { return rows_.size() >= config_.iterations; }
  void step();
  nlohmann::json snapshot() const;
  LveResult result() const;

 private:
  void validate_wiring() const;

  LveConfig config_;
  const EigenfaceDecoder* decoder_;
  const EmbeddingModel* model_;
  DecisionThreshold threshold_;
  std::vector<std::pair<std::string, FaceImage>> templates_;
  std::vector<Embedding> template_embeddings_;
  CmaState state_;
  NormalStream rng_;
  std::vector<MasterFaceRecord> records_;
  std::vector<RunLogRow> rows_;
};

LveResult run_lve(const LveConfig& config, const EigenfaceDecoder& decoder,
                  const EmbeddingModel& model, const DecisionThreshold& threshold,
                  const Gallery& gallery);

}  // namespace masterface
