#include "masterface/eval.hpp"

#include <algorithm>
#include <cmath>

#include "masterface/errors.hpp"
#include "masterface/pca.hpp"

namespace masterface {

using nlohmann::json;

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

EvalReport compute_fmr(const FaceImage& master, const Gallery& gallery, Split split,
                       const EmbeddingModel& model, const DecisionThreshold& threshold) {
  if (threshold.model_tag != model.training_tag)
    throw StructuralError("compute_fmr: threshold calibrated for '" +
                          threshold.model_tag + "' but model is '" +
                          model.training_tag + "'");
  const auto templates = enrolled_templates(gallery, split);

  EvalReport r;
  r.matcher_tag = model.training_tag;
  r.split = split_name(split);
  r.tau = threshold.tau;
  r.eer = threshold.eer;
  r.enrolled_count = templates.size();
  const Embedding master_emb = embed(model, master);
  for (const auto& [id, img] : templates) {
    const double s = embedding_similarity(master_emb, embed(model, img)).value;
    if (s >= threshold.tau) r.matched.emplace_back(id, s);
  }
  std::sort(r.matched.begin(), r.matched.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  r.matched_count = r.matched.size();
  r.fmr = static_cast<double>(r.matched_count) / static_cast<double>(r.enrolled_count);

  const PairScores pairs = split_pair_scores(model, gallery, split);
  r.genuine_count = pairs.genuine.size();
  r.imposter_count = pairs.imposter.size();
  r.genuine_mean = mean_of(pairs.genuine);
  r.imposter_mean = mean_of(pairs.imposter);
  return r;
}

ScoreHistogram score_histograms(const Gallery& gallery, Split split,
                                const EmbeddingModel& model, const FaceImage& master,
                                std::size_t bins) {
  if (bins < 1) throw StructuralError("score_histograms: bins must be >= 1");
  const PairScores pairs = split_pair_scores(model, gallery, split);
  if (pairs.genuine.empty())
    throw StructuralError(std::string("score_histograms: split '") + split_name(split) +
                          "' has no genuine pairs");
  const auto templates = enrolled_templates(gallery, split);
  const Embedding master_emb = embed(model, master);
  std::vector<double> master_scores;
  master_scores.reserve(templates.size());
  for (const auto& [id, img] : templates)
    master_scores.push_back(embedding_similarity(master_emb, embed(model, img)).value);

  ScoreHistogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(bins);
  h.genuine.assign(bins, 0);
  h.imposter.assign(bins, 0);
  h.master.assign(bins, 0);
  const auto bin_of = [bins](double s) {
    const double t = (s + 1.0) / 2.0 * static_cast<double>(bins);
    const auto b = static_cast<long>(std::floor(t));
    return static_cast<std::size_t>(
        std::min<long>(static_cast<long>(bins) - 1, std::max<long>(0, b)));
  };
  for (double s : pairs.genuine) ++h.genuine[bin_of(s)];
  for (double s : pairs.imposter) ++h.imposter[bin_of(s)];
  for (double s : master_scores) ++h.master[bin_of(s)];
  h.genuine_mean = mean_of(pairs.genuine);
  h.imposter_mean = mean_of(pairs.imposter);
  h.master_mean = mean_of(master_scores);
  return h;
}

double wolf_attack_probability(const std::vector<MasterFaceRecord>& candidates,
                               const EigenfaceDecoder& decoder, const Gallery& gallery,
                               Split split, const EmbeddingModel& model,
                               const DecisionThreshold& threshold) {
  if (candidates.empty())
    throw StructuralError("wolf_attack_probability: no candidates");
  double wap = 0.0;
  for (const auto& rec : candidates) {
    const EvalReport r =
        compute_fmr(generate(decoder, rec.latent), gallery, split, model, threshold);
    wap = std::max(wap, r.fmr);
  }
  return wap;
}

TransferMatrix transfer_evaluate(const FaceImage& master,
                                 const std::vector<TransferInput>& matchers,
                                 const Gallery& gallery, Split split) {
  TransferMatrix m;
  bool have[2][2] = {{false, false}, {false, false}};
  for (const auto& in : matchers) {
    if (in.model == nullptr || in.threshold == nullptr)
      throw StructuralError("transfer_evaluate: null matcher entry");
    TransferCell cell;
    cell.report = compute_fmr(master, gallery, split, *in.model, *in.threshold);
    cell.success = cell.report.fmr > in.threshold->eer;
    have[in.same_arch ? 0 : 1][in.same_db ? 0 : 1] = true;
    if (in.same_arch && in.same_db) m.same_arch_same_db = cell;
    else if (in.same_arch && !in.same_db) m.same_arch_diff_db = cell;
    else if (!in.same_arch && in.same_db) m.diff_arch_same_db = cell;
    else m.diff_arch_diff_db = cell;
  }
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d)
      if (!have[a][d])
        throw StructuralError(std::string("transfer_evaluate: missing cell (") +
                              (a == 0 ? "same" : "different") + " arch, " +
                              (d == 0 ? "same" : "different") + " db)");
  return m;
}

std::vector<TrajectoryPoint> latent_trajectory_projection(
    const std::vector<MasterFaceRecord>& records, std::size_t stride) {
  if (records.size() < 2)
    throw StructuralError("latent_trajectory_projection: need at least 2 records");
  if (stride < 1)
    throw StructuralError("latent_trajectory_projection: stride must be >= 1");

  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < records.size(); i += stride) picked.push_back(i);
  if (picked.back() != records.size() - 1) picked.push_back(records.size() - 1);

  std::vector<std::vector<double>> latents;
  latents.reserve(picked.size());
  for (std::size_t i : picked) latents.push_back(records[i].latent);

  const std::size_t dim = latents.front().size();
  const std::size_t k = std::min({std::size_t{2}, latents.size() - 1, dim});
  const PcaModel pca = pca_fit(latents, k);

  std::size_t best = 0;
  for (std::size_t p = 1; p < picked.size(); ++p)
    if (records[picked[p]].mean_score > records[picked[best]].mean_score) best = p;

  std::vector<TrajectoryPoint> out;
  out.reserve(picked.size());
  for (std::size_t p = 0; p < picked.size(); ++p) {
    const std::vector<double> y = project(pca, latents[p]);
    TrajectoryPoint pt;
    pt.index = records[picked[p]].iteration;
    pt.x = y.empty() ? 0.0 : y[0];
    pt.y = y.size() > 1 ? y[1] : 0.0;
    pt.is_best = (p == best);
    out.push_back(pt);
  }
  return out;
}

json report_to_json(const EvalReport& r) {
  json matched = json::array();
  for (const auto& [id, score] : r.matched)
    matched.push_back(json{{"identity", id}, {"score", score}});
  return json{{"matcher_tag", r.matcher_tag},
              {"split", r.split},
              {"tau", r.tau},
              {"eer", r.eer},
              {"fmr", round6(r.fmr)},
              {"enrolled_count", r.enrolled_count},
              {"matched_count", r.matched_count},
              {"matched", matched},
              {"genuine_pairs", r.genuine_count},
              {"imposter_pairs", r.imposter_count},
              {"genuine_mean", r.genuine_mean},
              {"imposter_mean", r.imposter_mean}};
}

json transfer_to_json(const TransferMatrix& m) {
  const auto cell = [](const TransferCell& c) {
    return json{{"report", report_to_json(c.report)}, {"success", c.success}};
  };
  return json{{"same_arch_same_db", cell(m.same_arch_same_db)},
              {"same_arch_diff_db", cell(m.same_arch_diff_db)},
              {"diff_arch_same_db", cell(m.diff_arch_same_db)},
              {"diff_arch_diff_db", cell(m.diff_arch_diff_db)}};
}

}  // namespace masterface
