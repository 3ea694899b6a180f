#include "masterface/lve.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "masterface/errors.hpp"

namespace masterface {

using nlohmann::json;

double mean_score(const FaceImage& face,
                  const std::vector<std::pair<std::string, FaceImage>>& templates,
                  const EmbeddingModel& model) {
  if (templates.empty()) throw StructuralError("mean_score: empty template list");
  double sum = 0.0;
  for (const auto& [id, img] : templates) sum += face_matching(model, face, img).value;
  return sum / static_cast<double>(templates.size());
}

double mean_score(const FaceImage& face, const std::vector<Embedding>& templates,
                  const EmbeddingModel& model) {
  if (templates.empty()) throw StructuralError("mean_score: empty template list");
  const Embedding fe = embed(model, face);
  double sum = 0.0;
  for (const Embedding& t : templates) sum += embedding_similarity(fe, t).value;
  return sum / static_cast<double>(templates.size());
}

namespace {

std::vector<Embedding> embed_all(
    const EmbeddingModel& model,
    const std::vector<std::pair<std::string, FaceImage>>& templates) {
  std::vector<Embedding> out;
  out.reserve(templates.size());
  for (const auto& [id, img] : templates) out.push_back(embed(model, img));
  return out;
}

}  // namespace

std::pair<std::size_t, double> get_best_face(const std::vector<FaceImage>& faces,
                                             const std::vector<double>& scores) {
  if (faces.size() != scores.size())
    throw StructuralError("get_best_face: faces and scores length mismatch");
  if (faces.empty()) throw StructuralError("get_best_face: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return {best, scores[best]};
}

LveDriver::LveDriver(const LveConfig& config, const EigenfaceDecoder& decoder,
                     const EmbeddingModel& model, const DecisionThreshold& threshold,
                     const Gallery& gallery)
    : config_(config),
      decoder_(&decoder),
      model_(&model),
      threshold_(threshold),
      templates_(enrolled_templates(gallery, config.score_target_split)),
      template_embeddings_(embed_all(model, templates_)),
      state_(init(default_params(config.latent_dim, config.population, config.sigma0),
                  std::vector<double>(config.latent_dim, 0.0))),
      rng_(config.seed) {
  validate_wiring();
}

LveDriver::LveDriver(const json& snapshot, const LveConfig& config,
                     const EigenfaceDecoder& decoder, const EmbeddingModel& model,
                     const DecisionThreshold& threshold, const Gallery& gallery)
    : config_(config),
      decoder_(&decoder),
      model_(&model),
      threshold_(threshold),
      templates_(enrolled_templates(gallery, config.score_target_split)),
      template_embeddings_(embed_all(model, templates_)),
      state_(init(default_params(config.latent_dim, config.population, config.sigma0),
                  std::vector<double>(config.latent_dim, 0.0))),
      rng_(config.seed) {
  validate_wiring();
  if (snapshot.value("format", "") != std::string("lve-snapshot-v1"))
    throw StructuralError("resume: unrecognized snapshot format");
  const json& sc = snapshot.at("config");
  const auto check_eq = [&](const char* field, auto snap_value, auto cfg_value) {
    if (snap_value != cfg_value) {
      std::ostringstream msg;
      msg << "resume: " << field << " mismatch (snapshot " << snap_value
          << ", config " << cfg_value << ")";
      throw StructuralError(msg.str());
    }
  };
  check_eq("population", sc.at("population").get<std::size_t>(), config.population);
  check_eq("latent_dim", sc.at("latent_dim").get<std::size_t>(), config.latent_dim);
  check_eq("sigma0", sc.at("sigma0").get<double>(), config.sigma0);
  check_eq("seed", sc.at("seed").get<std::uint64_t>(), config.seed);
  check_eq("matcher_tag", sc.at("matcher_tag").get<std::string>(), config.matcher_tag);
  check_eq("score_target_split",
           sc.value("score_target_split", std::string(split_name(Split::kWorld))),
           std::string(split_name(config.score_target_split)));

  state_ = cma_restore(snapshot.at("cma"), rng_);
  records_.clear();
  for (const json& r : snapshot.at("records")) {
    MasterFaceRecord rec;
    rec.latent = r.at("latent").get<std::vector<double>>();
    rec.mean_score = r.at("mean_score").get<double>();
    rec.iteration = r.at("iteration").get<std::size_t>();
    rec.image_digest = r.at("image_digest").get<std::string>();
    records_.push_back(std::move(rec));
  }
  rows_.clear();
  for (const json& r : snapshot.at("rows")) {
    RunLogRow row;
    row.iteration = r.at("iteration").get<std::size_t>();
    row.best_score = r.at("best_score").get<double>();
    row.train_fmr = r.at("train_fmr").get<double>();
    row.elapsed_ms = r.at("elapsed_ms").get<double>();
    rows_.push_back(row);
  }
  if (rows_.size() != records_.size())
    throw StructuralError("resume: snapshot rows and records disagree");
  if (rows_.size() >= config_.iterations)
    throw StructuralError("resume: snapshot already has all requested iterations");
}

void LveDriver::validate_wiring() const {
  if (config_.population < 2)
    throw StructuralError("lve: population must be at least 2");
  if (config_.iterations < 1)
    throw StructuralError("lve: iterations must be at least 1");
  if (config_.latent_dim != decoder_->latent_dim)
    throw StructuralError("lve: config latent_dim does not match the decoder");
  if (!config_.matcher_tag.empty() && config_.matcher_tag != model_->training_tag)
    throw StructuralError("lve: config matcher_tag '" + config_.matcher_tag +
                          "' does not match model tag '" + model_->training_tag + "'");
  if (threshold_.model_tag != model_->training_tag)
    throw StructuralError("lve: threshold was calibrated for '" + threshold_.model_tag +
                          "', not '" + model_->training_tag + "'");
  if (decoder_->width != model_->width || decoder_->height != model_->height)
    throw StructuralError("lve: decoder and matcher image dimensions differ");
}

void LveDriver::step() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t it = rows_.size();

  std::vector<Candidate> cands = ask(state_, rng_);
  std::vector<LatentVector> latents(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) latents[i] = cands[i].latent;
  const std::vector<FaceImage> faces = batch_generate(*decoder_, latents);

  std::vector<double> scores(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    scores[i] = mean_score(faces[i], template_embeddings_, *model_);
    if (!std::isfinite(scores[i])) {
      std::ostringstream msg;
      msg << "lve: non-finite mean score at iteration " << it << ", candidate " << i;
      throw NumericalError(msg.str());
    }
    cands[i].fitness = scores[i];
  }

  const auto [best_idx, best_score] = get_best_face(faces, scores);
  const Embedding best_emb = embed(*model_, faces[best_idx]);
  std::size_t matched = 0;
  for (const Embedding& t : template_embeddings_)
    if (embedding_similarity(best_emb, t).value >= threshold_.tau) ++matched;
  const double train_fmr =
      static_cast<double>(matched) / static_cast<double>(templates_.size());

  MasterFaceRecord rec;
  rec.latent = cands[best_idx].latent;
  rec.mean_score = best_score;
  rec.iteration = it;
  rec.image_digest = image_digest(faces[best_idx]);

  tell(state_, cands);

  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  records_.push_back(std::move(rec));
  rows_.push_back(RunLogRow{it, best_score, train_fmr, elapsed_ms});
}

json LveDriver::snapshot() const {
  json records = json::array();
  for (const auto& r : records_)
    records.push_back(json{{"latent", r.latent},
                           {"mean_score", r.mean_score},
                           {"iteration", r.iteration},
                           {"image_digest", r.image_digest}});
  json rows = json::array();
  for (const auto& r : rows_)
    rows.push_back(json{{"iteration", r.iteration},
                        {"best_score", r.best_score},
                        {"train_fmr", r.train_fmr},
                        {"elapsed_ms", r.elapsed_ms}});
  return json{{"format", "lve-snapshot-v1"},
              {"config",
               json{{"population", config_.population},
                    {"iterations", config_.iterations},
                    {"latent_dim", config_.latent_dim},
                    {"sigma0", config_.sigma0},
                    {"seed", config_.seed},
                    {"matcher_tag", config_.matcher_tag},
                    {"score_target_split", split_name(config_.score_target_split)}}},
              {"cma", cma_snapshot(state_, rng_)},
              {"records", records},
              {"rows", rows}};
}

LveResult LveDriver::result() const {
  if (records_.empty()) throw StructuralError("lve: no iterations have run");
  LveResult res;
  res.log.rows = rows_;
  res.per_iteration = records_;
  std::size_t best = 0;
  for (std::size_t i = 1; i < records_.size(); ++i)
    if (records_[i].mean_score > records_[best].mean_score) best = i;
  res.global_best = records_[best];
  return res;
}

LveResult run_lve(const LveConfig& config, const EigenfaceDecoder& decoder,
                  const EmbeddingModel& model, const DecisionThreshold& threshold,
                  const Gallery& gallery) {
  LveDriver driver(config, decoder, model, threshold, gallery);
  while (!driver.done()) driver.step();
  return driver.result();
}

}  // namespace masterface
