// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <numeric>

#include "vexrec/objective.hpp"
#include "vexrec/recommend.hpp"
#include "vexrec/synthetic.hpp"
#include "vexrec/trainer.hpp"

namespace {

using namespace vexrec;

struct Fixture {
  SynthDataset data;
  Vocabulary vocab;
  ReviewTable reviews;
  ModelParams params;
  std::vector<LabeledPair> batch;
  std::vector<std::vector<std::size_t>> excluded;
  std::vector<std::size_t> users;
  std::vector<UserItem> pairs;

  Fixture() {
    SynthConfig sc;
    sc.users = 120;
    sc.items = 240;
    sc.regions = 49;
    sc.feature_dim = 32;
    data = generate_synthetic(sc);
    std::vector<std::vector<std::string>> streams;
    for (const auto& r : data.reviews) streams.push_back(r.tokens);
    vocab = build_vocabulary(streams);
    reviews = ReviewTable(encode_reviews(data.reviews, data.interactions, vocab).reviews,
                          sc.items);
    TrainConfig tc;
    params = init_params(dims_for(tc, sc.users, sc.items, sc.regions, sc.feature_dim,
                                  vocab.size()),
                         InitScheme::ScaledUniform, 0.1, 1);
    for (const auto& r : data.interactions.records()) {
      batch.push_back({r.user, r.item, 1});
      if (batch.size() == 256) break;
    }
    for (std::size_t u = 0; u < sc.users; ++u) {
      excluded.push_back(data.interactions.items_of(u));
      users.push_back(u);
    }
    for (std::size_t u = 0; u < sc.users; ++u) {
      for (std::size_t i = 0; i < sc.items; i += 8) pairs.push_back({u, i});
    }
  }

  ModelInputs inputs() const {
    return {Variant::ReVecf, &data.features, &reviews, vocab.end_index()};
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_JointObjectiveSerial(benchmark::State& state) {
  const auto& f = fixture();
  ModelParams grads = ModelParams::zeros(f.params.dims);
  for (auto _ : state) {
    grads.set_zero();
    benchmark::DoNotOptimize(joint_objective(f.params, f.inputs(), f.batch, 0.2, 1e-3, &grads));
  }
}
BENCHMARK(BM_JointObjectiveSerial)->Unit(benchmark::kMillisecond);

void BM_JointObjectiveParallel(benchmark::State& state) {
  const auto& f = fixture();
  ModelParams grads = ModelParams::zeros(f.params.dims);
  for (auto _ : state) {
    grads.set_zero();
    benchmark::DoNotOptimize(joint_objective_parallel(f.params, f.inputs(), f.batch, 0.2, 1e-3,
                                                      &grads, state.range(0)));
  }
}
BENCHMARK(BM_JointObjectiveParallel)->Arg(1)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_RecommendSerial(benchmark::State& state) {
  const auto& f = fixture();
  const ScoringModel model{&f.params, Variant::ReVecf, &f.data.features};
  for (auto _ : state) benchmark::DoNotOptimize(recommend_serial(model, f.users, f.excluded, 5));
}
BENCHMARK(BM_RecommendSerial)->Unit(benchmark::kMillisecond);

void BM_RecommendParallel(benchmark::State& state) {
  const auto& f = fixture();
  const ScoringModel model{&f.params, Variant::ReVecf, &f.data.features};
  for (auto _ : state) {
    benchmark::DoNotOptimize(recommend_parallel(model, f.users, f.excluded, 5));
  }
}
BENCHMARK(BM_RecommendParallel)->Unit(benchmark::kMillisecond);

void BM_AttentionMapsSerial(benchmark::State& state) {
  const auto& f = fixture();
  const ScoringModel model{&f.params, Variant::ReVecf, &f.data.features};
  for (auto _ : state) benchmark::DoNotOptimize(attention_maps_serial(model, f.pairs));
}
BENCHMARK(BM_AttentionMapsSerial)->Unit(benchmark::kMillisecond);

void BM_AttentionMapsParallel(benchmark::State& state) {
  const auto& f = fixture();
  const ScoringModel model{&f.params, Variant::ReVecf, &f.data.features};
  for (auto _ : state) benchmark::DoNotOptimize(attention_maps_parallel(model, f.pairs));
}
BENCHMARK(BM_AttentionMapsParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
