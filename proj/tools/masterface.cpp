// Command-line pipeline: synth -> train -> attack -> evaluate -> report.
// Stages hand off through files under --out; every output carries the
// effective-config digest and seed so a run is reconstructible from its
// output directory. Exit codes: 0 success, 2 config error, 3 runtime error.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "masterface/data.hpp"
#include "masterface/errors.hpp"
#include "masterface/eval.hpp"
#include "masterface/generator.hpp"
#include "masterface/lve.hpp"
#include "masterface/matcher.hpp"
#include "masterface/model_io.hpp"
#include "masterface/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace masterface;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MatcherConfig {
  std::string tag;
  std::size_t embedding_dim = 32;
  FeatureMap feature_map = FeatureMap::kIdentity;
  Split train_split = Split::kWorld;
  bool same_arch = true;
  bool same_db = true;
};

struct RunConfig {
  std::optional<SynthSpec> synth;
  std::string manifest;  // external gallery manifest, if given
  std::size_t latent_dim = 64;
  std::vector<MatcherConfig> matchers;
  LveConfig lve;
  Split eval_split = Split::kEval;
  std::size_t bins = 50;
  std::size_t trajectory_stride = 20;

  std::string digest;  // of the effective config document
  std::uint64_t meta_seed = 0;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
};

template <typename T>
T require(const json& j, const std::string& where, const char* field) {
  if (!j.contains(field))
    throw ConfigError("config: missing field " + where + "." + field);
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field " + where + "." + field + " has the wrong type");
  }
}

template <typename T>
T optional_field(const json& j, const std::string& where, const char* field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field " + where + "." + field + " has the wrong type");
  }
}

RunConfig parse_config(const std::string& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + ex.what());
  }

  // Apply overrides onto the document first: the digest describes the
  // effective configuration, so every stage of an overridden run agrees.
  if (ov.seed) {
    if (doc.contains("gallery") && doc["gallery"].contains("synth"))
      doc["gallery"]["synth"]["seed"] = *ov.seed;
    doc["lve"]["seed"] = *ov.seed;
  }
  if (ov.iterations) doc["lve"]["iterations"] = *ov.iterations;

  RunConfig cfg;
  const json gallery = require<json>(doc, "", "gallery");
  const bool has_synth = gallery.contains("synth");
  const bool has_manifest = gallery.contains("manifest");
  if (has_synth == has_manifest)
    throw ConfigError("config: gallery needs exactly one of 'synth' or 'manifest'");
  if (has_synth) {
    const json s = gallery.at("synth");
    SynthSpec spec;
    spec.identities = require<std::size_t>(s, "gallery.synth", "identities");
    spec.images_per_identity =
        require<std::size_t>(s, "gallery.synth", "images_per_identity");
    spec.width = optional_field<std::size_t>(s, "gallery.synth", "width", 32);
    spec.height = optional_field<std::size_t>(s, "gallery.synth", "height", 32);
    spec.identity_scale = require<double>(s, "gallery.synth", "identity_scale");
    spec.intra_noise = require<double>(s, "gallery.synth", "intra_noise");
    spec.seed = require<std::uint64_t>(s, "gallery.synth", "seed");
    if (spec.identities < 1 || spec.images_per_identity < 1)
      throw ConfigError("config: gallery.synth counts must be >= 1");
    if (!(spec.identity_scale > spec.intra_noise) || !(spec.intra_noise > 0))
      throw ConfigError(
          "config: gallery.synth requires identity_scale > intra_noise > 0");
    cfg.synth = spec;
  } else {
    cfg.manifest = require<std::string>(gallery, "gallery", "manifest");
  }

  cfg.latent_dim =
      require<std::size_t>(require<json>(doc, "", "generator"), "generator", "latent_dim");
  if (cfg.latent_dim < 1) throw ConfigError("config: generator.latent_dim must be >= 1");

  const json matchers = require<json>(doc, "", "matchers");
  if (!matchers.is_array() || matchers.empty())
    throw ConfigError("config: matchers must be a non-empty array");
  std::set<std::string> tags;
  for (std::size_t i = 0; i < matchers.size(); ++i) {
    const std::string where = "matchers[" + std::to_string(i) + "]";
    const json& mj = matchers.at(i);
    MatcherConfig mc;
    mc.tag = require<std::string>(mj, where, "tag");
    mc.embedding_dim = require<std::size_t>(mj, where, "embedding_dim");
    if (mc.embedding_dim < 1)
      throw ConfigError("config: " + where + ".embedding_dim must be >= 1");
    try {
      mc.feature_map = feature_map_from_name(require<std::string>(mj, where, "feature_map"));
      mc.train_split = split_from_name(require<std::string>(mj, where, "train_split"));
    } catch (const StructuralError& ex) {
      throw ConfigError("config: " + where + ": " + ex.what());
    }
    const std::string arch = require<std::string>(mj, where, "arch");
    const std::string db = require<std::string>(mj, where, "db");
    if ((arch != "same" && arch != "different") || (db != "same" && db != "different"))
      throw ConfigError("config: " + where + ": arch/db must be 'same' or 'different'");
    mc.same_arch = arch == "same";
    mc.same_db = db == "same";
    if (!tags.insert(mc.tag).second)
      throw ConfigError("config: " + where + ".tag duplicates '" + mc.tag + "'");
    cfg.matchers.push_back(std::move(mc));
  }

  const json lve = require<json>(doc, "", "lve");
  cfg.lve.population = require<std::size_t>(lve, "lve", "population");
  cfg.lve.iterations = require<std::size_t>(lve, "lve", "iterations");
  cfg.lve.latent_dim = cfg.latent_dim;
  cfg.lve.sigma0 = optional_field<double>(lve, "lve", "sigma0", 0.3);
  cfg.lve.seed = require<std::uint64_t>(lve, "lve", "seed");
  cfg.lve.matcher_tag = require<std::string>(lve, "lve", "matcher");
  if (cfg.lve.population < 2) throw ConfigError("config: lve.population must be >= 2");
  if (cfg.lve.iterations < 1) throw ConfigError("config: lve.iterations must be >= 1");
  if (!(cfg.lve.sigma0 > 0)) throw ConfigError("config: lve.sigma0 must be > 0");
  if (tags.count(cfg.lve.matcher_tag) == 0)
    throw ConfigError("config: lve.matcher '" + cfg.lve.matcher_tag +
                      "' is not a configured matcher tag");

  const json ev = require<json>(doc, "", "eval");
  try {
    cfg.eval_split = split_from_name(require<std::string>(ev, "eval", "split"));
  } catch (const StructuralError& ex) {
    throw ConfigError(std::string("config: eval.split: ") + ex.what());
  }
  cfg.bins = optional_field<std::size_t>(ev, "eval", "bins", 50);
  cfg.trajectory_stride =
      optional_field<std::size_t>(ev, "eval", "trajectory_stride", 20);
  if (cfg.bins < 1) throw ConfigError("config: eval.bins must be >= 1");
  if (cfg.trajectory_stride < 1)
    throw ConfigError("config: eval.trajectory_stride must be >= 1");

  const std::string canonical = doc.dump();
  cfg.digest = to_hex(fnv1a64(canonical.data(), canonical.size()));
  cfg.meta_seed = cfg.lve.seed;
  return cfg;
}

std::string meta_comment(const RunConfig& cfg, std::uint64_t seed) {
  return "config_digest=" + cfg.digest + " seed=" + std::to_string(seed);
}

json meta_json(const RunConfig& cfg, std::uint64_t seed) {
  return json{{"config_digest", cfg.digest}, {"seed", seed}};
}

void write_text(const std::string& path, const std::string& body) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << body;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_json(const std::string& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

json read_json(const std::string& path, const std::string& hint) {
  std::ifstream in(path);
  if (!in)
    throw IoError("missing prerequisite: '" + path + "' (" + hint + ")");
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw IoError("'" + path + "' is not valid JSON: " + ex.what());
  }
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// ---- stage paths ------------------------------------------------------

std::string gallery_manifest_path(const RunConfig& cfg, const std::string& out) {
  if (!cfg.manifest.empty()) return cfg.manifest;
  return (fs::path(out) / "gallery" / "manifest.csv").string();
}

std::string decoder_path(const std::string& out) {
  return (fs::path(out) / "models" / "decoder.bin").string();
}
std::string matcher_path(const std::string& out, const std::string& tag) {
  return (fs::path(out) / "models" / ("matcher_" + tag + ".bin")).string();
}
std::string calibration_path(const std::string& out) {
  return (fs::path(out) / "models" / "calibration.json").string();
}
std::string runlog_path(const std::string& out) {
  return (fs::path(out) / "attack" / "runlog.csv").string();
}
std::string master_path(const std::string& out) {
  return (fs::path(out) / "attack" / "master.json").string();
}
std::string records_path(const std::string& out) {
  return (fs::path(out) / "attack" / "records.json").string();
}
std::string snapshot_path(const std::string& out) {
  return (fs::path(out) / "attack" / "snapshot.json").string();
}

// ---- shared loaders ----------------------------------------------------

Gallery load_gallery(const RunConfig& cfg, const std::string& out) {
  const std::string manifest = gallery_manifest_path(cfg, out);
  if (!fs::exists(manifest)) {
    const std::string hint =
        cfg.manifest.empty() ? "run the synth stage first" : "gallery manifest not found";
    throw IoError("missing prerequisite: '" + manifest + "' (" + hint + ")");
  }
  return load_manifest(manifest);
}

EigenfaceDecoder load_decoder_or_fail(const std::string& out) {
  const std::string path = decoder_path(out);
  if (!fs::exists(path))
    throw IoError("missing prerequisite: '" + path + "' (run the train stage first)");
  return load_decoder(path);
}

EmbeddingModel load_matcher_or_fail(const std::string& out, const std::string& tag) {
  const std::string path = matcher_path(out, tag);
  if (!fs::exists(path))
    throw IoError("missing prerequisite: '" + path + "' (run the train stage first)");
  return load_matcher(path);
}

DecisionThreshold threshold_for(const json& calibration, const std::string& tag) {
  for (const json& t : calibration.at("thresholds")) {
    if (t.at("model_tag").get<std::string>() == tag) {
      DecisionThreshold th;
      th.tau = t.at("tau").get<double>();
      th.eer = t.at("eer").get<double>();
      th.model_tag = tag;
      th.calibration_tag = t.at("calibration_tag").get<std::string>();
      return th;
    }
  }
  throw StructuralError("calibration has no threshold for matcher '" + tag + "'");
}

MasterFaceRecord record_from_json(const json& r) {
  MasterFaceRecord rec;
  rec.latent = r.at("latent").get<std::vector<double>>();
  rec.mean_score = r.at("mean_score").get<double>();
  rec.iteration = r.at("iteration").get<std::size_t>();
  rec.image_digest = r.at("image_digest").get<std::string>();
  return rec;
}

json record_to_json(const MasterFaceRecord& rec) {
  return json{{"latent", rec.latent},
              {"mean_score", rec.mean_score},
              {"iteration", rec.iteration},
              {"image_digest", rec.image_digest}};
}

// ---- stages -------------------------------------------------------------

void cmd_synth(const RunConfig& cfg, const std::string& out) {
  if (!cfg.synth)
    throw StructuralError("synth stage requires a gallery.synth configuration");
  const Gallery g = synth_gallery(*cfg.synth);
  const std::string dir = (fs::path(out) / "gallery").string();
  write_manifest(g, dir, meta_comment(cfg, cfg.synth->seed));
  json spec_echo{{"identities", cfg.synth->identities},
                 {"images_per_identity", cfg.synth->images_per_identity},
                 {"width", cfg.synth->width},
                 {"height", cfg.synth->height},
                 {"identity_scale", cfg.synth->identity_scale},
                 {"intra_noise", cfg.synth->intra_noise},
                 {"seed", cfg.synth->seed}};
  json doc = meta_json(cfg, cfg.synth->seed);
  doc["synth"] = spec_echo;
  doc["identities"] = json{{"world", g.identity_count(Split::kWorld)},
                           {"dev", g.identity_count(Split::kDev)},
                           {"eval", g.identity_count(Split::kEval)}};
  write_json((fs::path(dir) / "spec.json").string(), doc);
}

void cmd_train(const RunConfig& cfg, const std::string& out) {
  const Gallery g = load_gallery(cfg, out);
  fs::create_directories(fs::path(out) / "models");

  const EigenfaceDecoder decoder = train_decoder(g, Split::kWorld, cfg.latent_dim);
  save_decoder(decoder, decoder_path(out), meta_json(cfg, cfg.meta_seed));

  json thresholds = json::array();
  for (const auto& mc : cfg.matchers) {
    const EmbeddingModel m =
        train_matcher(g, mc.train_split, mc.embedding_dim, mc.feature_map, mc.tag);
    save_matcher(m, matcher_path(out, mc.tag), meta_json(cfg, cfg.meta_seed));
    const DecisionThreshold th = calibrate_threshold(m, g, Split::kDev);
    thresholds.push_back(json{{"model_tag", th.model_tag},
                              {"tau", th.tau},
                              {"eer", th.eer},
                              {"calibration_tag", th.calibration_tag}});
  }
  json doc = meta_json(cfg, cfg.meta_seed);
  doc["calibration_split"] = "dev";
  doc["thresholds"] = thresholds;
  write_json(calibration_path(out), doc);
}

void cmd_attack(const RunConfig& cfg, const std::string& out,
                const std::string& resume_from) {
  const Gallery g = load_gallery(cfg, out);
  const EigenfaceDecoder decoder = load_decoder_or_fail(out);
  const EmbeddingModel model = load_matcher_or_fail(out, cfg.lve.matcher_tag);
  const json calibration =
      read_json(calibration_path(out), "run the train stage first");
  const DecisionThreshold threshold = threshold_for(calibration, cfg.lve.matcher_tag);

  std::optional<LveDriver> driver;
  if (resume_from.empty()) {
    driver.emplace(cfg.lve, decoder, model, threshold, g);
  } else {
    const json snap = read_json(resume_from, "snapshot file not found");
    driver.emplace(snap, cfg.lve, decoder, model, threshold, g);
  }
  while (!driver->done()) driver->step();
  const LveResult res = driver->result();

  std::string csv = "# " + meta_comment(cfg, cfg.lve.seed) + "\n";
  csv += "iteration,best_score,train_fmr,elapsed_ms\n";
  for (const auto& row : res.log.rows) {
    csv += std::to_string(row.iteration) + "," + fmt("%.17g", row.best_score) + "," +
           fmt("%.6f", row.train_fmr) + "," + fmt("%.3f", row.elapsed_ms) + "\n";
  }
  write_text(runlog_path(out), csv);

  json master = meta_json(cfg, cfg.lve.seed);
  master["matcher_tag"] = cfg.lve.matcher_tag;
  master["iterations"] = res.log.rows.size();
  master["record"] = record_to_json(res.global_best);
  write_json(master_path(out), master);

  json records = meta_json(cfg, cfg.lve.seed);
  records["records"] = json::array();
  for (const auto& rec : res.per_iteration)
    records["records"].push_back(record_to_json(rec));
  write_json(records_path(out), records);

  json snap = driver->snapshot();
  snap["config_digest"] = cfg.digest;
  write_json(snapshot_path(out), snap);
}

void cmd_evaluate(const RunConfig& cfg, const std::string& out) {
  const Gallery g = load_gallery(cfg, out);
  const EigenfaceDecoder decoder = load_decoder_or_fail(out);
  const json calibration =
      read_json(calibration_path(out), "run the train stage first");
  const json master_doc =
      read_json(master_path(out), "run the attack stage first");
  const json records_doc =
      read_json(records_path(out), "run the attack stage first");

  const MasterFaceRecord best = record_from_json(master_doc.at("record"));
  const FaceImage master = generate(decoder, best.latent);
  std::vector<MasterFaceRecord> records;
  for (const json& r : records_doc.at("records")) records.push_back(record_from_json(r));

  const EmbeddingModel lve_model = load_matcher_or_fail(out, cfg.lve.matcher_tag);
  const DecisionThreshold lve_threshold =
      threshold_for(calibration, cfg.lve.matcher_tag);

  const std::string eval_dir = (fs::path(out) / "eval").string();
  fs::create_directories(eval_dir);

  const EvalReport report =
      compute_fmr(master, g, cfg.eval_split, lve_model, lve_threshold);
  const ScoreHistogram hist =
      score_histograms(g, cfg.eval_split, lve_model, master, cfg.bins);
  json report_doc = meta_json(cfg, cfg.lve.seed);
  report_doc["report"] = report_to_json(report);
  report_doc["histogram_means"] = json{{"genuine", hist.genuine_mean},
                                       {"imposter", hist.imposter_mean},
                                       {"master", hist.master_mean}};
  write_json((fs::path(eval_dir) / "report.json").string(), report_doc);

  std::string csv = "# " + meta_comment(cfg, cfg.lve.seed) + "\n";
  csv += "bin_lo,bin_hi,genuine,imposter,master\n";
  for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
    csv += fmt("%.6f", hist.edges[b]) + "," + fmt("%.6f", hist.edges[b + 1]) + "," +
           std::to_string(hist.genuine[b]) + "," + std::to_string(hist.imposter[b]) +
           "," + std::to_string(hist.master[b]) + "\n";
  }
  write_text((fs::path(eval_dir) / "histogram.csv").string(), csv);

  const std::vector<TrajectoryPoint> traj =
      latent_trajectory_projection(records, cfg.trajectory_stride);
  csv = "# " + meta_comment(cfg, cfg.lve.seed) + "\n";
  csv += "idx,x,y,is_best\n";
  for (const auto& pt : traj) {
    csv += std::to_string(pt.index) + "," + fmt("%.17g", pt.x) + "," +
           fmt("%.17g", pt.y) + "," + (pt.is_best ? "1" : "0") + "\n";
  }
  write_text((fs::path(eval_dir) / "trajectory.csv").string(), csv);

  std::vector<EmbeddingModel> models;
  std::vector<DecisionThreshold> thresholds;
  models.reserve(cfg.matchers.size());
  thresholds.reserve(cfg.matchers.size());
  std::vector<TransferInput> inputs;
  for (const auto& mc : cfg.matchers) {
    models.push_back(load_matcher_or_fail(out, mc.tag));
    thresholds.push_back(threshold_for(calibration, mc.tag));
  }
  for (std::size_t i = 0; i < cfg.matchers.size(); ++i) {
    TransferInput in;
    in.same_arch = cfg.matchers[i].same_arch;
    in.same_db = cfg.matchers[i].same_db;
    in.model = &models[i];
    in.threshold = &thresholds[i];
    inputs.push_back(in);
  }
  const TransferMatrix matrix = transfer_evaluate(master, inputs, g, cfg.eval_split);
  json transfer_doc = meta_json(cfg, cfg.lve.seed);
  transfer_doc["split"] = split_name(cfg.eval_split);
  transfer_doc["transfer"] = transfer_to_json(matrix);
  write_json((fs::path(eval_dir) / "transfer.json").string(), transfer_doc);

  const double wap = wolf_attack_probability(records, decoder, g, cfg.eval_split,
                                             lve_model, lve_threshold);
  json wap_doc = meta_json(cfg, cfg.lve.seed);
  wap_doc["split"] = split_name(cfg.eval_split);
  wap_doc["candidates"] = records.size();
  wap_doc["wap"] = std::round(wap * 1e6) / 1e6;
  write_json((fs::path(eval_dir) / "wap.json").string(), wap_doc);
}

void cmd_report(const RunConfig& cfg, const std::string& out) {
  const fs::path base(out);
  json doc = meta_json(cfg, cfg.meta_seed);
  doc["calibration"] =
      read_json(calibration_path(out), "run the train stage first");
  doc["attack"] = read_json(master_path(out), "run the attack stage first");
  doc["eval"] = json{
      {"report",
       read_json((base / "eval" / "report.json").string(), "run the evaluate stage first")},
      {"transfer",
       read_json((base / "eval" / "transfer.json").string(), "run the evaluate stage first")},
      {"wap", read_json((base / "eval" / "wap.json").string(), "run the evaluate stage first")}};
  write_json((base / "report.json").string(), doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Master-face generation pipeline over synthetic galleries"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", resume_from;
  std::uint64_t seed_override = 0;
  std::size_t iter_override = 0;
  bool has_seed = false, has_iters = false;

  app.add_option("--config", config_path, "Run configuration JSON")->required();
  app.add_option("--out", out_dir, "Output directory (default: out)");
  app.add_option("--seed", seed_override, "Override the run seed")
      ->each([&](const std::string&) { has_seed = true; });
  app.add_option("--iterations", iter_override, "Override lve.iterations")
      ->each([&](const std::string&) { has_iters = true; });

  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic gallery");
  CLI::App* train = app.add_subcommand("train", "Train decoder and matchers");
  CLI::App* attack = app.add_subcommand("attack", "Run latent-space optimization");
  attack->add_option("--resume", resume_from, "Continue from a snapshot JSON");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate the master face");
  CLI::App* report = app.add_subcommand("report", "Merge stage outputs into one report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config: " << e.what() << "\n";
    return kExitConfig;
  }

  Overrides ov;
  if (has_seed) ov.seed = seed_override;
  if (has_iters) ov.iterations = iter_override;

  RunConfig cfg;
  try {
    cfg = parse_config(config_path, ov);
  } catch (const ConfigError& ex) {
    std::cerr << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    std::cerr << "config: " << ex.what() << "\n";
    return kExitConfig;
  }

  try {
    if (synth->parsed()) cmd_synth(cfg, out_dir);
    if (train->parsed()) cmd_train(cfg, out_dir);
    if (attack->parsed()) cmd_attack(cfg, out_dir, resume_from);
    if (evaluate->parsed()) cmd_evaluate(cfg, out_dir);
    if (report->parsed()) cmd_report(cfg, out_dir);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
