// Microbenchmarks for the pipeline's hot paths: the dense eigensolver, one
// optimizer ask/tell cycle, face decoding, and candidate scoring.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "masterface/cmaes.hpp"
#include "masterface/data.hpp"
#include "masterface/generator.hpp"
#include "masterface/lve.hpp"
#include "masterface/matcher.hpp"
#include "masterface/matrix.hpp"
#include "masterface/rng.hpp"

using namespace masterface;

namespace {

Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
  NormalStream rng(seed);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = rng.gauss();
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

struct PipelineFixture {
  Gallery gallery;
  EigenfaceDecoder decoder;
  EmbeddingModel model;
  std::vector<Embedding> template_embeddings;

  PipelineFixture() {
    SynthSpec spec;  // reference geometry
    spec.seed = 1;
    gallery = synth_gallery(spec);
    decoder = train_decoder(gallery, Split::kWorld, 64);
    model = train_matcher(gallery, Split::kWorld, 96, FeatureMap::kIdentity, "known");
    for (const auto& [id, img] : enrolled_templates(gallery, Split::kWorld))
      template_embeddings.push_back(embed(model, img));
  }
};

const PipelineFixture& fixture() {
  static const PipelineFixture f;
  return f;
}

void BM_SymEig(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_symmetric(n, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sym_eig(a));
  }
}
BENCHMARK(BM_SymEig)->Arg(16)->Arg(64)->Arg(128);

void BM_CmaesAskTell(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  CmaState st = init(default_params(dim, 22, 0.3), std::vector<double>(dim, 0.0));
  NormalStream rng(7);
  for (auto _ : state) {
    auto cands = ask(st, rng);
    for (auto& c : cands) {
      double s = 0.0;
      for (double v : c.latent) s += v * v;
      c.fitness = -s;
    }
    tell(st, cands);
  }
  state.SetItemsProcessed(state.iterations() * 22);
}
BENCHMARK(BM_CmaesAskTell)->Arg(16)->Arg(64);

void BM_Generate(benchmark::State& state) {
  const PipelineFixture& f = fixture();
  NormalStream rng(11);
  LatentVector z(f.decoder.latent_dim);
  for (double& v : z) v = rng.gauss();
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate(f.decoder, z));
  }
}
BENCHMARK(BM_Generate);

void BM_MeanScore(benchmark::State& state) {
  const PipelineFixture& f = fixture();
  NormalStream rng(13);
  LatentVector z(f.decoder.latent_dim);
  for (double& v : z) v = rng.gauss();
  const FaceImage face = generate(f.decoder, z);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_score(face, f.template_embeddings, f.model));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(f.template_embeddings.size()));
}
BENCHMARK(BM_MeanScore);

}  // namespace

BENCHMARK_MAIN();
