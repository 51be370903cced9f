#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "vexrec/attention.hpp"
#include "vexrec/gradcheck.hpp"
#include "vexrec/numerics.hpp"
#include "vexrec/objective.hpp"
#include "vexrec/text_gru.hpp"
#include "vexrec/vecf.hpp"

using namespace vexrec;

namespace {

AttentionParams two_region_params() {
  AttentionParams a;
  a.w_user = DenseVector{0.0, 0.0};
  a.w_region = DenseVector{1.0, 0.0};
  a.bias = 0.0;
  return a;
}

// Two regions, D = 2: f_1 = (1, 5), f_2 = (3, -1).
const std::vector<double> kTwoRegions{1.0, 5.0, 3.0, -1.0};

double sum_of(const DenseVector& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("attention normalises relu scores") {
  const FeatureGrid grid{kTwoRegions, 2, 2};
  const DenseVector p{0.3, -0.7};
  const AttentionMap map = attention_map(p.span(), grid, two_region_params());
  CHECK_FALSE(map.fallback);
  CHECK(map.weights[0] == 0.25);
  CHECK(map.weights[1] == 0.75);
  const DenseVector image = merged_image(map, grid);
  CHECK(image[0] == doctest::Approx(2.5));
  CHECK(image[1] == doctest::Approx(0.5));
}

TEST_CASE("attention falls back to uniform when every score is clipped") {
  const FeatureGrid grid{kTwoRegions, 2, 2};
  AttentionParams a = two_region_params();
  a.bias = -10.0;
  const DenseVector p{1.0, 1.0};
  const AttentionForward fwd = attention_forward(p.span(), grid, a);
  CHECK(fwd.map.fallback);
  CHECK(fwd.map.weights == DenseVector{0.5, 0.5});

  AttentionParams grads{DenseVector(2), DenseVector(2), 0.0};
  DenseVector d_user(2);
  const DenseVector d_image{1.0, -2.0};
  attention_backward(fwd, p.span(), grid, a, d_image.span(), {}, d_user.span(), grads, {});
  CHECK(grads.w_user == DenseVector(2));
  CHECK(grads.w_region == DenseVector(2));
  CHECK(grads.bias == 0.0);
  CHECK(d_user == DenseVector(2));
}

TEST_CASE("attention is invariant to a positive rescaling of its parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> feats(5 * 3);
  for (double& x : feats) x = u(rng);
  const FeatureGrid grid{feats, 5, 3};
  AttentionParams a{DenseVector{u(rng), u(rng)}, DenseVector{u(rng), u(rng), u(rng)}, 0.4};
  const DenseVector p{0.2, 0.9};
  const AttentionMap base = attention_map(p.span(), grid, a);
  for (double& x : a.w_user) x *= 3.0;
  for (double& x : a.w_region) x *= 3.0;
  a.bias *= 3.0;
  const AttentionMap scaled = attention_map(p.span(), grid, a);
  for (std::size_t k = 0; k < 5; ++k) CHECK(scaled.weights[k] == doctest::Approx(base.weights[k]));
}

TEST_CASE("merge and predict follow the element-wise product") {
  const DenseMatrix proj(2, 2, {1, 0, 0, 2});
  const DenseVector merged = merge(DenseVector{1.0, 3.0}, DenseVector{4.0, 0.5}, proj);
  CHECK(merged == DenseVector{4.0, 3.0});
  CHECK(predict(DenseVector{0.0, 0.0}, merged) == 0.5);
  CHECK(predict(DenseVector{1.0, 0.0}, merged) == doctest::Approx(sigmoid(4.0)));
}

TEST_CASE("image-free forward pass leaves the item embedding unmerged") {
  const ModelDims dims{2, 3, 4, 5, 1, 3, 4, 2};
  const ModelParams params = init_params(dims, InitScheme::ScaledUniform, 0.5, 3);
  const PairForward fwd = forward_pair(params, Variant::ReCf, nullptr, 1, 2);
  CHECK_FALSE(fwd.attention.has_value());
  const auto q = params.item_embedding.row(2);
  CHECK(fwd.merged_item.values() == std::vector<double>(q.begin(), q.end()));
  CHECK(fwd.image == DenseVector(5));
  CHECK_THROWS(forward_pair(params, Variant::ReVecf, nullptr, 1, 2));
}

TEST_CASE("bce terms and their logit derivatives") {
  CHECK(bce_term(0.0, 1) == doctest::Approx(std::log(0.5)));
  CHECK(bce_term(0.0, 0) == doctest::Approx(std::log(0.5)));
  CHECK(bce_term(2.0, 0) == doctest::Approx(std::log(1.0 - sigmoid(2.0))));
  CHECK(bce_term_grad(1.5, 1) == doctest::Approx(1.0 - sigmoid(1.5)));
  CHECK(bce_term_grad(1.5, 0) == doctest::Approx(-sigmoid(1.5)));
  CHECK(std::isfinite(bce_term(800.0, 0)));
}

TEST_CASE("negative sampling draws uniformly from unowned items") {
  std::mt19937_64 rng(5);
  const std::vector<std::size_t> owned{1, 4};
  std::map<std::size_t, int> counts;
  const auto draws = sample_negatives(owned, 6, 40000, rng);
  for (std::size_t i : draws) ++counts[i];
  CHECK(counts.size() == 4);
  CHECK(counts.count(1) == 0);
  CHECK(counts.count(4) == 0);
  for (const auto& [item, n] : counts) CHECK(std::abs(n - 10000) < 400);

  const std::vector<std::size_t> everything{0, 1, 2};
  CHECK_THROWS(sample_negatives(everything, 3, 1, rng));
}

TEST_CASE("visual GRU step with zero context equals the plain step") {
  const ModelDims dims{1, 1, 2, 3, 1, 4, 6, 3};
  const ModelParams params = init_params(dims, InitScheme::ScaledUniform, 0.8, 9);
  const DenseVector h{0.1, -0.2, 0.3, 0.05};
  for (std::size_t w = 0; w < 6; ++w) {
    CHECK(gru_step_visual(params.gru, h, w, DenseVector(3)) == gru_step_standard(params.gru, h, w));
  }
}

TEST_CASE("context gate is one half with zero hidden weights") {
  const ModelDims dims{1, 1, 2, 3, 1, 4, 6, 3};
  ModelParams params = init_params(dims, InitScheme::ScaledUniform, 0.8, 2);
  std::fill(params.gate.w_hidden.begin(), params.gate.w_hidden.end(), 0.0);
  const DenseVector h{1.0, -2.0, 0.5, 3.0};
  CHECK(context_gate_beta(params.gate, h) == 0.5);
  const DenseVector p{0.4, -0.1}, q{0.2, 0.7}, img{0.3, 0.0, -0.6};
  const DenseVector a = context_vector_step(p, q, img, h, params.gate);
  const DenseVector b = context_vector_initial(p, q, img, params.gate);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-14));
}

TEST_CASE("word distributions are probability vectors") {
  const ModelDims dims{1, 1, 2, 3, 1, 4, 7, 3};
  const ModelParams params = init_params(dims, InitScheme::ScaledUniform, 3.0, 4);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    DenseVector h(4);
    for (double& x : h) x = u(rng);
    const DenseVector d = word_distribution(params.gru, h);
    CHECK(d.dim() == 7);
    CHECK(std::abs(sum_of(d) - 1.0) <= 1e-12);
  }
}

TEST_CASE("greedy decoding respects the length cap") {
  const ModelDims dims{1, 1, 2, 3, 1, 4, 5, 3};
  ModelParams params = init_params(dims, InitScheme::ScaledUniform, 0.5, 4);
  // Make token 0 overwhelmingly likely and never the end token.
  params.gru.b_out = DenseVector{50.0, 0.0, 0.0, 0.0, 0.0};
  const DenseVector p(2), q(2), img(3);
  const TextInputs in{p.span(), q.span(), img.span()};
  const auto out = greedy_decode(params, in, 4, 7);
  CHECK(out == std::vector<std::size_t>(7, 0));
  params.gru.b_out = DenseVector{0.0, 0.0, 0.0, 0.0, 50.0};
  CHECK(greedy_decode(params, in, 4, 7).empty());
}

TEST_CASE("the text model can memorise a single review") {
  const ModelDims dims{1, 1, 3, 3, 1, 8, 6, 4};
  ModelParams params = init_params(dims, InitScheme::ScaledUniform, 0.3, 12);
  const std::vector<std::size_t> review{2, 0, 3, 1};
  const std::size_t end = 5;
  const DenseVector img{0.2, -0.1, 0.4};
  ModelParams grads = ModelParams::zeros(dims);
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 400; ++step) {
    grads.set_zero();
    const TextInputs in{params.user_embedding.row(0), params.item_embedding.row(0), img.span()};
    last = review_log_likelihood(params, review, end, in, 1.0, &grads, {});
    if (step == 0) first = last;
    add_scaled(params, grads, 0.1);
  }
  CHECK(last > first);
  CHECK(last > -0.5);
  const TextInputs in{params.user_embedding.row(0), params.item_embedding.row(0), img.span()};
  CHECK(greedy_decode(params, in, end, 10) == review);
}

TEST_CASE("joint objective with delta zero is the BCE objective") {
  const GradFixture fx = make_grad_fixture(FixtureSpec{}, 3);
  ModelParams g_joint = ModelParams::zeros(fx.params.dims);
  ModelParams g_bce = ModelParams::zeros(fx.params.dims);
  const auto joint = joint_objective(fx.params, fx.inputs(), fx.batch, 0.0, fx.lambda, &g_joint);
  const double bce =
      bce_objective(fx.params, fx.variant, &fx.features, fx.batch, fx.lambda, &g_bce);
  CHECK(joint.total == bce);
  CHECK(g_joint == g_bce);
  CHECK(joint.review == 0.0);
}

TEST_CASE("image-only variant ignores the review weight") {
  FixtureSpec spec;
  spec.variant = Variant::Vecf;
  const GradFixture fx = make_grad_fixture(spec, 1);
  CHECK(effective_delta(Variant::Vecf, 0.7) == 0.0);
  CHECK(effective_delta(Variant::ReVecf, 0.7) == 0.7);
  const auto a = joint_objective(fx.params, fx.inputs(), fx.batch, 0.7, fx.lambda, nullptr);
  const auto b = joint_objective(fx.params, fx.inputs(), fx.batch, 0.0, fx.lambda, nullptr);
  CHECK(a.total == b.total);
}

TEST_CASE("regularizer gradient is -2 lambda theta") {
  const ModelDims dims{2, 2, 2, 2, 1, 2, 3, 2};
  const ModelParams params = init_params(dims, InitScheme::ScaledUniform, 1.0, 1);
  ModelParams grads = ModelParams::zeros(dims);
  const double r = regularize(params, 0.05, &grads);
  CHECK(r == doctest::Approx(0.05 * params.squared_norm()));
  const DenseVector p = flatten(params), g = flatten(grads);
  for (std::size_t k = 0; k < p.dim(); ++k) CHECK(g[k] == doctest::Approx(-0.1 * p[k]));
}

TEST_CASE("chunked objective matches the serial reference") {
  const GradFixture fx = make_grad_fixture(FixtureSpec{}, 7);
  ModelParams gs = ModelParams::zeros(fx.params.dims);
  const auto s = joint_objective(fx.params, fx.inputs(), fx.batch, 0.3, 0.01, &gs);
  for (std::size_t chunks : {1, 2, 3, 8}) {
    ModelParams gp = ModelParams::zeros(fx.params.dims);
    const auto p = joint_objective_parallel(fx.params, fx.inputs(), fx.batch, 0.3, 0.01, &gp, chunks);
    CHECK(p.total == doctest::Approx(s.total).epsilon(1e-13));
    const DenseVector a = flatten(gs), b = flatten(gp);
    for (std::size_t k = 0; k < a.dim(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
  }
  ModelParams g1 = ModelParams::zeros(fx.params.dims);
  const auto one = joint_objective_parallel(fx.params, fx.inputs(), fx.batch, 0.3, 0.01, &g1, 1);
  CHECK(one.total == s.total);
  CHECK(g1 == gs);
}

TEST_CASE("gradient check passes and catches a flipped group") {
  const GradFixture fx = make_grad_fixture(FixtureSpec{}, 0);
  CHECK(fixture_relu_margin(fx) >= 1e-3);
  CHECK(check_joint_gradients(fx).passed);
  const auto bad = check_joint_gradients(fx, 1e-4, 1e-5, ParamGroup::Gru);
  CHECK_FALSE(bad.passed);
  for (const auto& g : bad.groups) CHECK(g.passed == (g.group != ParamGroup::Gru));
  CHECK(parse_param_group("context_gate") == ParamGroup::ContextGate);
  CHECK_FALSE(parse_param_group("nope").has_value());
}
