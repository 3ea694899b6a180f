#include "masterface/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "masterface/errors.hpp"

namespace masterface {

const char* feature_map_name(FeatureMap map) {
  switch (map) {
    case FeatureMap::kIdentity: return "identity";
    case FeatureMap::kBlock2: return "block2";
  }
  return "?";
}

FeatureMap feature_map_from_name(const std::string& name) {
  if (name == "identity") return FeatureMap::kIdentity;
  if (name == "block2") return FeatureMap::kBlock2;
  throw StructuralError("unknown feature map '" + name + "'");
}

namespace {

std::vector<double> apply_feature_map(FeatureMap map, const FaceImage& image) {
  if (map == FeatureMap::kIdentity) return image.pixels;
  // 2x2 block averages; odd trailing row/column is dropped.
  const std::size_t ow = image.width / 2;
  const std::size_t oh = image.height / 2;
  if (ow == 0 || oh == 0)
    throw StructuralError("feature map block2: image smaller than 2x2");
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x)
      out[y * ow + x] = 0.25 * (image(2 * y, 2 * x) + image(2 * y, 2 * x + 1) +
                                image(2 * y + 1, 2 * x) + image(2 * y + 1, 2 * x + 1));
  return out;
}

}  // namespace

EmbeddingModel train_matcher(const Gallery& gallery, Split split, std::size_t e,
                             FeatureMap map, const std::string& tag) {
  std::vector<std::vector<double>> features;
  std::size_t w = 0, h = 0;
  for (const auto& entry : gallery.entries) {
    if (entry.split != split) continue;
    if (features.empty()) {
      w = entry.image.width;
      h = entry.image.height;
    } else if (entry.image.width != w || entry.image.height != h) {
      throw StructuralError("train_matcher: mixed image dimensions in training split");
    }
    features.push_back(apply_feature_map(map, entry.image));
  }
  if (features.size() < e + 1) {
    std::ostringstream msg;
    msg << "train_matcher: need at least e+1=" << (e + 1) << " images, split '"
        << split_name(split) << "' has " << features.size();
    throw StructuralError(msg.str());
  }
  EmbeddingModel m;
  m.pca = pca_fit(features, e);
  m.feature_map = map;
  m.width = w;
  m.height = h;
  m.training_tag = tag;
  return m;
}

Embedding embed(const EmbeddingModel& model, const FaceImage& image) {
  if (image.width != model.width || image.height != model.height)
    throw StructuralError("embed: image dimensions do not match the model");
  return Embedding{project(model.pca, apply_feature_map(model.feature_map, image))};
}

MatchScore face_matching(const EmbeddingModel& model, const FaceImage& a,
                         const FaceImage& b) {
  return embedding_similarity(embed(model, a), embed(model, b));
}

MatchScore embedding_similarity(const Embedding& ea, const Embedding& eb) {
  double dot_ab = 0.0, dot_aa = 0.0, dot_bb = 0.0;
  for (std::size_t i = 0; i < ea.values.size(); ++i) {
    dot_ab += ea.values[i] * eb.values[i];
    dot_aa += ea.values[i] * ea.values[i];
    dot_bb += eb.values[i] * eb.values[i];
  }
  const double denom2 = dot_aa * dot_bb;
  if (denom2 == 0.0) return {0.0, true};
  double v = dot_ab / std::sqrt(denom2);
  v = std::min(1.0, std::max(-1.0, v));
  return {v, false};
}

PairScores split_pair_scores(const EmbeddingModel& model, const Gallery& gallery,
                             Split split) {
  // Group split images by identity, first-occurrence order. Each image is
  // embedded once; pair scores are cosines of the cached embeddings.
  std::vector<std::string> order;
  std::map<std::string, std::vector<Embedding>> groups;
  for (const auto& e : gallery.entries) {
    if (e.split != split) continue;
    auto [it, inserted] = groups.try_emplace(e.identity);
    if (inserted) order.push_back(e.identity);
    it->second.push_back(embed(model, e.image));
  }
  PairScores out;
  for (const auto& id : order) {
    const auto& embs = groups[id];
    for (std::size_t i = 0; i < embs.size(); ++i)
      for (std::size_t j = i + 1; j < embs.size(); ++j)
        out.genuine.push_back(embedding_similarity(embs[i], embs[j]).value);
  }
  for (std::size_t gi = 0; gi < order.size(); ++gi)
    for (std::size_t gj = gi + 1; gj < order.size(); ++gj)
      for (const Embedding& a : groups[order[gi]])
        for (const Embedding& b : groups[order[gj]])
          out.imposter.push_back(embedding_similarity(a, b).value);
  return out;
}

EerResult eer_threshold(const std::vector<double>& genuine,
                        const std::vector<double>& imposter) {
  if (genuine.empty()) throw StructuralError("eer_threshold: no genuine pairs");
  if (imposter.empty()) throw StructuralError("eer_threshold: no imposter pairs");

  std::vector<double> gs = genuine, is = imposter;
  std::sort(gs.begin(), gs.end());
  std::sort(is.begin(), is.end());

  // Perfect separation: threshold at the gap midpoint.
  if (is.back() < gs.front())
    return {0.5 * (is.back() + gs.front()), 0.0};

  const double ng = static_cast<double>(gs.size());
  const double ni = static_cast<double>(is.size());
  // FAR(t) = fraction of imposter >= t; FRR(t) = fraction of genuine < t.
  const auto far_at = [&](double t) {
    return static_cast<double>(is.end() - std::lower_bound(is.begin(), is.end(), t)) / ni;
  };
  const auto frr_at = [&](double t) {
    return static_cast<double>(std::lower_bound(gs.begin(), gs.end(), t) - gs.begin()) / ng;
  };

  std::vector<double> cand;
  cand.reserve(gs.size() + is.size() + 1);
  cand.insert(cand.end(), gs.begin(), gs.end());
  cand.insert(cand.end(), is.begin(), is.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  cand.push_back(cand.back() + 1.0);  // sentinel with FAR = 0, FRR = 1

  double prev_t = cand.front();
  double prev_far = far_at(prev_t), prev_frr = frr_at(prev_t);
  for (std::size_t k = 1; k < cand.size(); ++k) {
    const double t = cand[k];
    const double far = far_at(t), frr = frr_at(t);
    const double d_prev = prev_far - prev_frr;
    const double d_cur = far - frr;
    if (d_prev >= 0.0 && d_cur < 0.0) {
      const double frac = d_prev / (d_prev - d_cur);
      const double tau = prev_t + frac * (t - prev_t);
      const double far_i = prev_far + frac * (far - prev_far);
      const double frr_i = prev_frr + frac * (frr - prev_frr);
      return {tau, 0.5 * (far_i + frr_i)};
    }
    if (d_prev == 0.0 && d_cur >= 0.0) {
      // Exact crossing at the earlier candidate; ties go to the lower threshold.
      return {prev_t, 0.5 * (prev_far + prev_frr)};
    }
    prev_t = t;
    prev_far = far;
    prev_frr = frr;
  }
  // FAR - FRR is +1 at -inf and -1 at the sentinel, so a crossing exists.
  return {prev_t, 0.5 * (prev_far + prev_frr)};
}

DecisionThreshold calibrate_threshold(const EmbeddingModel& model,
                                      const Gallery& gallery, Split dev_split) {
  const PairScores scores = split_pair_scores(model, gallery, dev_split);
  if (scores.genuine.empty())
    throw StructuralError("calibrate_threshold: no genuine pairs in split '" +
                          std::string(split_name(dev_split)) + "'");
  if (scores.imposter.empty())
    throw StructuralError("calibrate_threshold: no imposter pairs in split '" +
                          std::string(split_name(dev_split)) + "'");
  const EerResult r = eer_threshold(scores.genuine, scores.imposter);
  return DecisionThreshold{r.tau, r.eer, model.training_tag, split_name(dev_split)};
}

}  // namespace masterface
