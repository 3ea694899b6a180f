#include "masterface/model_io.hpp"

#include <fstream>

#include "masterface/errors.hpp"

namespace masterface {

using nlohmann::json;

namespace {

void write_blob(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_blob(std::ifstream& in, std::size_t count,
                              const std::string& path) {
  std::vector<double> v(count);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    throw IoError("model: truncated payload in '" + path + "'");
  return v;
}

json read_header(std::ifstream& in, const std::string& path,
                 const std::string& expected_kind) {
  std::string line;
  if (!std::getline(in, line))
    throw IoError("model: cannot read header of '" + path + "'");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw IoError("model: '" + path + "' header is not valid JSON");
  }
  if (header.value("kind", "") != expected_kind)
    throw IoError("model: '" + path + "' is not a " + expected_kind + " file");
  return header;
}

json pca_header(const PcaModel& pca) {
  return json{{"dim", pca.input_dim()}, {"k", pca.component_count()}};
}

PcaModel read_pca(std::ifstream& in, const json& h, const std::string& path) {
  const std::size_t dim = h.at("dim").get<std::size_t>();
  const std::size_t k = h.at("k").get<std::size_t>();
  PcaModel pca;
  pca.mean = read_blob(in, dim, path);
  pca.components = Matrix(dim, k);
  pca.components.data = read_blob(in, dim * k, path);
  pca.singular_values = read_blob(in, k, path);
  return pca;
}

}  // namespace

void save_decoder(const EigenfaceDecoder& d, const std::string& path,
                  const json& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("model: cannot write '" + path + "'");
  const json header{{"kind", "eigenface-decoder"},
                    {"width", d.width},
                    {"height", d.height},
                    {"latent_dim", d.latent_dim},
                    {"pca", pca_header(d.pca)},
                    {"residual_count", d.train_residuals.size()},
                    {"meta", meta}};
  out << header.dump() << "\n";
  write_blob(out, d.pca.mean);
  write_blob(out, d.pca.components.data);
  write_blob(out, d.pca.singular_values);
  write_blob(out, d.latent_scales);
  write_blob(out, d.train_residuals);
  if (!out) throw IoError("model: write failed for '" + path + "'");
}

EigenfaceDecoder load_decoder(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("model: cannot open '" + path + "'");
  const json h = read_header(in, path, "eigenface-decoder");
  EigenfaceDecoder d;
  d.width = h.at("width").get<std::size_t>();
  d.height = h.at("height").get<std::size_t>();
  d.latent_dim = h.at("latent_dim").get<std::size_t>();
  d.pca = read_pca(in, h.at("pca"), path);
  d.latent_scales = read_blob(in, d.latent_dim, path);
  d.train_residuals = read_blob(in, h.at("residual_count").get<std::size_t>(), path);
  return d;
}

void save_matcher(const EmbeddingModel& m, const std::string& path,
                  const json& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("model: cannot write '" + path + "'");
  const json header{{"kind", "embedding-matcher"},
                    {"width", m.width},
                    {"height", m.height},
                    {"feature_map", feature_map_name(m.feature_map)},
                    {"tag", m.training_tag},
                    {"pca", pca_header(m.pca)},
                    {"meta", meta}};
  out << header.dump() << "\n";
  write_blob(out, m.pca.mean);
  write_blob(out, m.pca.components.data);
  write_blob(out, m.pca.singular_values);
  if (!out) throw IoError("model: write failed for '" + path + "'");
}

EmbeddingModel load_matcher(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("model: cannot open '" + path + "'");
  const json h = read_header(in, path, "embedding-matcher");
  EmbeddingModel m;
  m.width = h.at("width").get<std::size_t>();
  m.height = h.at("height").get<std::size_t>();
  m.feature_map = feature_map_from_name(h.at("feature_map").get<std::string>());
  m.training_tag = h.at("tag").get<std::string>();
  m.pca = read_pca(in, h.at("pca"), path);
  return m;
}

}  // namespace masterface
