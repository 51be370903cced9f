// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vexrec/attention.hpp"
#include "vexrec/binary_io.hpp"
#include "vexrec/checkpoint.hpp"
#include "vexrec/evaluation.hpp"
#include "vexrec/feature_store.hpp"
#include "vexrec/gradcheck.hpp"
#include "vexrec/metrics.hpp"
#include "vexrec/objective.hpp"
#include "vexrec/synthetic.hpp"
#include "vexrec/text_gru.hpp"
#include "vexrec/trainer.hpp"

using namespace vexrec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void run(const char* name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.passed) ++failures;
  std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t failed_seeds = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GradFixture fx = make_grad_fixture(FixtureSpec{}, seed);
    const GradCheckReport r = check_joint_gradients(fx, 1e-4);
    if (!r.passed) ++failed_seeds;
    for (const auto& g : r.groups) worst = std::max(worst, g.max_relative_error);
  }
  const double secs = seconds_since(t0);
  return {failed_seeds == 0 && secs < 30.0,
          fmt("50 seeds, %zu failed, max rel err %.2e, %.1f s", failed_seeds, worst, secs)};
}

Outcome normalization_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_att = 0.0, worst_word = 0.0;
  std::size_t negative = 0, fallbacks = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t h = 1 + t % 49, d = 1 + t % 7, k = 1 + t % 5;
    std::vector<double> feats(h * d);
    for (double& x : feats) x = u(rng) * 3.0;
    AttentionParams a{DenseVector(k), DenseVector(d), u(rng)};
    for (double& x : a.w_user) x = u(rng);
    for (double& x : a.w_region) x = u(rng);
    if (t % 4 == 0) a.bias = -1e3;  // every pre-activation negative
    DenseVector p(k);
    for (double& x : p) x = u(rng);
    const AttentionMap m = attention_map(p.span(), FeatureGrid{feats, h, d}, a);
    fallbacks += m.fallback;
    double sum = 0.0;
    for (double w : m.weights) {
      negative += w < 0.0;
      sum += w;
    }
    worst_att = std::max(worst_att, std::abs(sum - 1.0));
  }
  for (int t = 0; t < 10000; ++t) {
    const ModelDims dims{1, 1, 1, 1, 1, 2 + static_cast<std::size_t>(t % 5),
                         3 + static_cast<std::size_t>(t % 40), 2};
    GruParams g = ModelParams::zeros(dims).gru;
    for (double& x : g.w_out.span()) x = u(rng) * 20.0;
    for (double& x : g.b_out) x = u(rng) * 20.0;
    DenseVector h(dims.hidden);
    for (double& x : h) x = u(rng);
    const DenseVector dist = word_distribution(g, h);
    const double sum = std::accumulate(dist.begin(), dist.end(), 0.0);
    worst_word = std::max(worst_word, std::abs(sum - 1.0));
  }
  const bool ok = worst_att <= 1e-9 && negative == 0 && fallbacks >= 2500 && worst_word <= 1e-12;
  return {ok, fmt("attention |sum-1| <= %.1e (%zu fallbacks, %zu negative), words |sum-1| <= %.1e",
                  worst_att, fallbacks, negative, worst_word)};
}

Outcome reduction_identities() {
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelDims dims{2, 3, 4, 5, 4, 6, 7, 3};
    const ModelParams params = init_params(dims, InitScheme::ScaledUniform, 1.0, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseVector h(6);
    for (double& x : h) x = u(rng);
    for (std::size_t w = 0; w < 7; ++w) {
      mismatches += !(gru_step_visual(params.gru, h, w, DenseVector(5)) ==
                      gru_step_standard(params.gru, h, w));
    }
  }

  std::size_t joint_mismatch = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GradFixture fx = make_grad_fixture(FixtureSpec{}, seed);
    ModelParams gj = ModelParams::zeros(fx.params.dims), gb = gj;
    const double j = joint_objective(fx.params, fx.inputs(), fx.batch, 0.0, fx.lambda, &gj).total;
    const double b = bce_objective(fx.params, fx.variant, &fx.features, fx.batch, fx.lambda, &gb);
    joint_mismatch += !(j == b && gj == gb);
  }

  ModelParams params = init_params({1, 1, 2, 3, 1, 5, 4, 2}, InitScheme::ScaledUniform, 1.0, 3);
  params.gate.w_hidden.fill(0.0);
  bool beta_half = true;
  for (double v : {-50.0, -1.0, 0.0, 2.5, 80.0}) {
    beta_half = beta_half && context_gate_beta(params.gate, DenseVector(5, v)) == 0.5;
  }
  return {mismatches == 0 && joint_mismatch == 0 && beta_half,
          fmt("gru step %zu mismatches, delta=0 %zu mismatches, beta=0.5 %s", mismatches,
              joint_mismatch, beta_half ? "exact" : "off")};
}

Outcome metric_oracle_suite() {
  std::mt19937_64 rng(99);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  double worst = 0.0;
  auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  for (int t = 0; t < 1000; ++t) {
    const std::size_t users = pick(1, 10), items = pick(1, 20), n = pick(1, 6);
    std::vector<std::vector<std::size_t>> lists(users), truth(users);
    std::vector<RecommendationList> recs;
    for (std::size_t u = 0; u < users; ++u) {
      std::vector<std::size_t> perm(items);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      lists[u].assign(perm.begin(), perm.begin() + std::min(n, items));
      std::shuffle(perm.begin(), perm.end(), rng);
      truth[u].assign(perm.begin(), perm.begin() + pick(0, items));
      recs.push_back({u, lists[u], {}});
    }
    if (std::all_of(truth.begin(), truth.end(), [](const auto& v) { return v.empty(); })) {
      truth[0].push_back(0);
    }
    for (bool mean_of_f1 : {false, true}) {
      const PRF a = precision_recall_f1(recs, truth, mean_of_f1 ? F1Mode::AverageOfF1
                                                                : F1Mode::OfAverages);
      const oracle::Prf b = oracle::list_prf(lists, truth, mean_of_f1);
      track(a.precision, b.p);
      track(a.recall, b.r);
      track(a.f1, b.f1);
    }
    track(hit_ratio(recs, truth), oracle::hit_ratio(lists, truth));
    track(ndcg(recs, truth, n), oracle::ndcg(lists, truth, n));

    std::vector<std::size_t> pred(pick(0, 12)), ref(pick(0, 12));
    const std::size_t vocab = pick(1, 6);
    for (auto& w : pred) w = pick(0, vocab);
    for (auto& w : ref) w = pick(0, vocab);
    for (std::size_t gram : {1, 2}) {
      const RougeScore a = rouge_n(pred, ref, gram);
      const oracle::Prf b = oracle::rouge(pred, ref, gram);
      track(a.prf.precision, b.p);
      track(a.prf.recall, b.r);
      track(a.prf.f1, b.f1);
    }
  }
  const std::vector<RecommendationList> one{{0, {4, 7, 9}, {}}};
  const double hand_ndcg = ndcg(one, {{7}}, 3);
  const std::vector<std::size_t> abc{0, 1, 2}, abd{0, 1, 3};
  const double hand_rouge = rouge_n(abc, abd, 2).prf.f1;
  const bool ok = worst <= 1e-12 && std::abs(hand_ndcg - 1.0 / std::log2(3.0)) <= 1e-12 &&
                  hand_rouge == 0.5;
  return {ok, fmt("1000 fixtures, max |diff| %.1e; ndcg rank 2 = %.15f; rouge-2 = %.17g", worst,
                  hand_ndcg, hand_rouge)};
}

Outcome learning_sanity() {
  const auto t0 = Clock::now();
  const SynthConfig sc;
  const SynthDataset data = generate_synthetic(sc);
  const TrainConfig tc;  // library defaults
  const SplitPlan split = split_per_user(data.interactions, 0.7, tc.seed);
  std::vector<std::vector<std::string>> streams;
  for (const auto& r : data.reviews) streams.push_back(r.tokens);
  const Vocabulary vocab = build_vocabulary(streams);
  const ReviewTable reviews(encode_reviews(data.reviews, data.interactions, vocab).reviews,
                            sc.items);

  TrainConfig config = tc;
  config.epochs = 200;
  TrainingSet set{sc.items, split.train, {Variant::ReVecf, &data.features, &reviews,
                                          vocab.end_index()}};
  ModelParams params = init_params(dims_for(config, sc.users, sc.items, sc.regions,
                                            sc.feature_dim, vocab.size()),
                                   config.init, config.init_scale, config.seed);
  Trainer trainer(config, set, params);
  trainer.train();

  const ScoringModel model{&params, Variant::ReVecf, &data.features};
  EvalOptions opts;
  opts.region_k = {};
  const EvalResult ev = evaluate_model(model, {&split, nullptr, 0, nullptr}, opts);
  const double f1 = ev.report.at("f1@5");
  const double f1_ratio = f1 / ev.random_baseline.f1;

  double mass = 0.0;
  for (const auto& g : data.ground_truth) {
    const AttentionMap m = attention_map(params.user_embedding.row(g.user),
                                         data.features.grid(g.item), params.attention);
    for (std::size_t c : g.cells) mass += m.weights[c];
  }
  mass /= static_cast<double>(data.ground_truth.size());
  const double floor = 2.0 * sc.planted_regions / static_cast<double>(sc.regions);
  const double secs = seconds_since(t0);
  return {f1_ratio >= 3.0 && mass >= floor && secs < 300.0,
          fmt("F1@5 %.4f = %.2fx random %.4f; planted mass %.3f vs floor %.3f; %.0f s", f1,
              f1_ratio, ev.random_baseline.f1, mass, floor, secs)};
}

// First fixture seed whose attention maps are all live, so that a zero
// gradient can only come from a missing path.
std::uint64_t live_attention_seed() {
  for (std::uint64_t seed = 0;; ++seed) {
    const GradFixture fx = make_grad_fixture(FixtureSpec{}, seed);
    bool live = true;
    for (const auto& ex : fx.batch) {
      live = live && !attention_map(fx.params.user_embedding.row(ex.user),
                                    fx.features.grid(ex.item), fx.params.attention)
                          .fallback;
    }
    if (live) return seed;
  }
}

double attention_grad_norm(Variant variant, std::uint64_t seed) {
  FixtureSpec spec;
  spec.variant = variant;
  const GradFixture fx = make_grad_fixture(spec, seed);
  ModelParams grads = ModelParams::zeros(fx.params.dims);
  // δ = 1, λ = 0 leaves only the review terms.
  joint_objective(fx.params, fx.inputs(), fx.batch, 1.0, 0.0, &grads);
  double s = grads.attention.bias * grads.attention.bias;
  for (double x : grads.attention.w_user) s += x * x;
  for (double x : grads.attention.w_region) s += x * x;
  return std::sqrt(s);
}

Outcome backprop_probe() {
  const std::uint64_t seed = live_attention_seed();
  const double with_image = attention_grad_norm(Variant::ReVecf, seed);
  const double without = attention_grad_norm(Variant::ReCf, seed);
  return {with_image > 0.0 && without == 0.0,
          fmt("review-loss attention gradient norm on fixture %llu: re-vecf %.3e, re-cf %.1f",
              static_cast<unsigned long long>(seed), with_image, without)};
}

Outcome region_calibration() {
  constexpr std::size_t g = 14, side = 5, cells = side * side, k = 5;
  const std::vector<double> uniform(g * g, 1.0 / (g * g));

  // Exact expectation and variance: L = 2 w.p. 0.66, L = 3 w.p. 0.34 (mean 2.34 cells).
  double mean = 0.0, second = 0.0;
  auto add = [&](double weight, const std::vector<std::size_t>& lab) {
    const double f1 = oracle::region(uniform, g, side, lab, k).f1;
    mean += weight * f1;
    second += weight * f1 * f1;
  };
  const double pairs = cells * (cells - 1) / 2.0;
  const double triples = cells * (cells - 1) * (cells - 2) / 6.0;
  for (std::size_t a = 0; a < cells; ++a) {
    for (std::size_t b = a + 1; b < cells; ++b) {
      add(0.66 / pairs, {a, b});
      for (std::size_t c = b + 1; c < cells; ++c) add(0.34 / triples, {a, b, c});
    }
  }
  const double sigma = std::sqrt(std::max(0.0, second - mean * mean));

  std::mt19937_64 rng(31);
  std::bernoulli_distribution three(0.34);
  std::vector<std::size_t> all(cells);
  std::iota(all.begin(), all.end(), 0);
  constexpr std::size_t trials = 100000;
  double mc = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::shuffle(all.begin(), all.end(), rng);
    RegionLabelSet labels{0, 0, side, {all.begin(), all.begin() + (three(rng) ? 3 : 2)}};
    mc += region_explanation_score(uniform, labels, k).f1;
  }
  mc /= trials;
  const double se = sigma / std::sqrt(static_cast<double>(trials));
  const bool calibrated = std::abs(mc - mean) <= 3.0 * se;

  // A model whose attention fires only on regions inside labelled cells.
  double worst_precision = 1.0;
  for (int t = 0; t < 1000; ++t) {
    std::shuffle(all.begin(), all.end(), rng);
    RegionLabelSet labels{0, 0, side, {all.begin(), all.begin() + (three(rng) ? 3 : 2)}};
    std::vector<double> feats(g * g * 2, 0.0);
    for (std::size_t c = 0; c < g * g; ++c) {
      const bool inside = std::count(labels.cells.begin(), labels.cells.end(),
                                     coarse_cell(c, g, side)) > 0;
      feats[2 * c] = inside ? 1.0 : 0.0;
      feats[2 * c + 1] = 1.0;
    }
    const AttentionParams att{DenseVector{0.3}, DenseVector{1.0, 0.2}, -0.5};
    const AttentionMap m = attention_map(DenseVector{0.1}.span(), FeatureGrid{feats, g * g, 2}, att);
    worst_precision = std::min(worst_precision, region_explanation_score(m.weights, labels, k).precision);
  }
  return {calibrated && worst_precision == 1.0,
          fmt("MC top-5 F1 %.5f vs exact %.5f (3 sigma = %.5f); concentrated precision %.3f", mc,
              mean, 3.0 * se, worst_precision)};
}

std::string vxrf(std::uint32_t version, std::uint32_t m, std::uint32_t h, std::uint32_t d,
                 std::size_t floats, float value = 0.5F) {
  std::ostringstream out;
  out.write("VXRF", 4);
  for (std::uint32_t v : {version, m, h, d}) binary::write_le(out, v);
  for (std::size_t i = 0; i < floats; ++i) binary::write_le(out, value);
  return out.str();
}

Outcome determinism_and_persistence() {
  SynthConfig sc;
  const SynthDataset data = generate_synthetic(sc);
  std::vector<std::vector<std::string>> streams;
  for (const auto& r : data.reviews) streams.push_back(r.tokens);
  const Vocabulary vocab = build_vocabulary(streams);
  const ReviewTable reviews(encode_reviews(data.reviews, data.interactions, vocab).reviews,
                            sc.items);
  const SplitPlan split = split_per_user(data.interactions, 0.7, 1);
  TrainConfig tc;
  tc.epochs = 3;
  const TrainingSet set{sc.items, split.train,
                        {Variant::ReVecf, &data.features, &reviews, vocab.end_index()}};
  auto trained = [&] {
    ModelParams p = init_params(dims_for(tc, sc.users, sc.items, sc.regions, sc.feature_dim,
                                         vocab.size()),
                                tc.init, tc.init_scale, tc.seed);
    Trainer(tc, set, p).train();
    return p;
  };
  const ModelParams a = trained();
  const ModelParams b = trained();
  const bool reproducible = a == b;

  const auto path = std::filesystem::temp_directory_path() / "vexrec_acceptance.vxcp";
  save_checkpoint(path, {Variant::ReVecf, a});
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  const bool round_trip = back.params == a && back.variant == Variant::ReVecf;

  const std::vector<std::pair<const char*, std::string>> malformed{
      {"truncated magic", "VX"},
      {"bad magic", "VXRG" + vxrf(1, 1, 1, 1, 1).substr(4)},
      {"truncated header", vxrf(1, 1, 1, 1, 0).substr(0, 13)},
      {"bad version", vxrf(2, 1, 1, 1, 1)},
      {"zero dimension", vxrf(1, 2, 0, 3, 0)},
      {"dimension overflow", vxrf(1, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu, 1)},
      {"payload length mismatch", vxrf(1, 2, 2, 2, 7)},
      {"non-finite value", vxrf(1, 1, 2, 1, 2, std::numeric_limits<float>::infinity())},
  };
  std::size_t rejected = 0;
  std::string missed;
  for (const auto& [name, bytes] : malformed) {
    std::istringstream in(bytes);
    try {
      read_feature_store(in);
      missed += std::string(" ") + name;
    } catch (const FormatError&) {
      ++rejected;
    }
  }
  std::istringstream good(vxrf(1, 2, 2, 2, 8));
  const bool accepts_valid = read_feature_store(good).num_items() == 2;

  return {reproducible && round_trip && rejected == malformed.size() && accepts_valid,
          fmt("training reproducible %s, checkpoint round trip %s, %zu/%zu malformed VXRF rejected%s",
              reproducible ? "yes" : "no", round_trip ? "exact" : "differs", rejected,
              malformed.size(), missed.c_str())};
}

}  // namespace

int main() {
  run("gradient suite", gradient_suite);
  run("normalization suite", normalization_suite);
  run("reduction identities", reduction_identities);
  run("metric oracle suite", metric_oracle_suite);
  run("learning sanity", learning_sanity);
  run("backprop path probe", backprop_probe);
  run("region evaluation calibration", region_calibration);
  run("determinism and persistence", determinism_and_persistence);
  std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
