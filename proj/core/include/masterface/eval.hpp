#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "masterface/data.hpp"
#include "masterface/generator.hpp"
#include "masterface/lve.hpp"
#include "masterface/matcher.hpp"

namespace masterface {

struct EvalReport {
  std::string matcher_tag;
  std::string split;
  double tau = 0.0;
  double eer = 0.0;
  double fmr = 0.0;  // matched_count / enrolled_count, exact
  std::size_t enrolled_count = 0;
  std::size_t matched_count = 0;
  // Matched identities with scores, descending score order.
  std::vector<std::pair<std::string, double>> matched;
  // Baseline pair-score summaries for the split.
  std::size_t genuine_count = 0;
  std::size_t imposter_count = 0;
  double genuine_mean = 0.0;
  double imposter_mean = 0.0;
};

// Scores the probe against every enrolled template of the split; a template
// counts as matched iff score >= threshold.tau.
EvalReport compute_fmr(const FaceImage& master, const Gallery& gallery, Split split,
                       const EmbeddingModel& model, const DecisionThreshold& threshold);

struct ScoreHistogram {
  std::vector<double> edges;  // bins+1 uniform edges over [-1,1]
  std::vector<std::size_t> genuine;
  std::vector<std::size_t> imposter;
  std::vector<std::size_t> master;
  double genuine_mean = 0.0;
  double imposter_mean = 0.0;
  double master_mean = 0.0;
};

ScoreHistogram score_histograms(const Gallery& gallery, Split split,
                                const EmbeddingModel& model, const FaceImage& master,
                                std::size_t bins = 50);

// Maximum FMR over the candidate master faces (regenerated from latents).
double wolf_attack_probability(const std::vector<MasterFaceRecord>& candidates,
                               const EigenfaceDecoder& decoder, const Gallery& gallery,
                               Split split, const EmbeddingModel& model,
                               const DecisionThreshold& threshold);

// One matcher per (architecture, database) transfer cell.
struct TransferInput {
  bool same_arch = true;
  bool same_db = true;
  const EmbeddingModel* model = nullptr;
  const DecisionThreshold* threshold = nullptr;
};

struct TransferCell {
  EvalReport report;
  bool success = false;  // master FMR strictly exceeds the matcher's EER
};

struct TransferMatrix {
  TransferCell same_arch_same_db;
  TransferCell same_arch_diff_db;
  TransferCell diff_arch_same_db;
  TransferCell diff_arch_diff_db;
};

TransferMatrix transfer_evaluate(const FaceImage& master,
                                 const std::vector<TransferInput>& matchers,
                                 const Gallery& gallery, Split split);

struct TrajectoryPoint {
  std::size_t index = 0;  // iteration of the projected record
  double x = 0.0;
  double y = 0.0;
  bool is_best = false;
};

// 2-D PCA projection of the strided latent sequence; the highest-scoring
// projected record is flagged. The final record is always included.
std::vector<TrajectoryPoint> latent_trajectory_projection(
    const std::vector<MasterFaceRecord>& records, std::size_t stride);

nlohmann::json report_to_json(const EvalReport& report);
nlohmann::json transfer_to_json(const TransferMatrix& matrix);

}  // namespace masterface
