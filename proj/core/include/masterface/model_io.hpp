#pragma once

#include <string>

#include <json.hpp>

#include "masterface/generator.hpp"
#include "masterface/matcher.hpp"

namespace masterface {

// Model files are a single JSON header line followed by raw little-endian
// IEEE-754 double blobs, so round-trips are bit-exact. `meta` is stored
// verbatim in the header (run provenance: config digest, seed).
void save_decoder(const EigenfaceDecoder& decoder, const std::string& path,
                  const nlohmann::json& meta = nlohmann::json::object());
EigenfaceDecoder load_decoder(const std::string& path);

void save_matcher(const EmbeddingModel& model, const std::string& path,
                  const nlohmann::json& meta = nlohmann::json::object());
EmbeddingModel load_matcher(const std::string& path);

}  // namespace masterface
