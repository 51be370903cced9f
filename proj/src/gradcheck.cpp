#include "vexrec/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "vexrec/attention.hpp"
#include "vexrec/numerics.hpp"
#include "vexrec/text_gru.hpp"

namespace vexrec {

namespace {

constexpr ParamGroup kGroups[] = {ParamGroup::User,      ParamGroup::Item,
                                  ParamGroup::Projection, ParamGroup::Attention,
                                  ParamGroup::Gru,       ParamGroup::ContextGate,
                                  ParamGroup::Output};

GradFixture draw_fixture(const FixtureSpec& spec, std::mt19937_64& rng) {
  const ModelDims& d = spec.dims;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GradFixture f;
  f.variant = spec.variant;
  f.delta = spec.delta;
  f.lambda = spec.lambda;
  f.params = init_params(d, InitScheme::ScaledUniform, spec.init_scale, rng());
  f.features = RegionalFeatureStore(d.items, d.regions, d.feature_dim);
  for (std::size_t i = 0; i < d.items; ++i) {
    for (double& v : f.features.mutable_grid(i)) v = unit(rng);
  }

  // Vocabulary layout matches Vocabulary: regular tokens, then end, unknown.
  const std::size_t regular = d.vocab - 2;
  f.end_token = regular;
  std::uniform_int_distribution<std::size_t> token(0, regular - 1);
  std::uniform_int_distribution<std::size_t> item(0, d.items - 1);

  std::vector<Review> reviews;
  for (std::size_t u = 0; u < d.users; ++u) {
    const std::size_t pos = u % d.items;
    std::size_t neg = item(rng);
    while (neg == pos) neg = item(rng);
    f.batch.push_back({u, pos, 1});
    f.batch.push_back({u, neg, 0});
    Review r{u, pos, {}};
    for (std::size_t t = 0; t < spec.review_length; ++t) r.tokens.push_back(token(rng));
    reviews.push_back(std::move(r));
  }
  // One positive without a review exercises the BCE-only path.
  f.batch.push_back({0, 1, 1});
  f.reviews = ReviewTable(std::move(reviews), d.items);
  return f;
}

}  // namespace

ModelInputs GradFixture::inputs() const {
  return ModelInputs{variant, uses_image(variant) ? &features : nullptr, &reviews, end_token};
}

GradFixture make_grad_fixture(const FixtureSpec& spec, std::uint64_t seed) {
  if (spec.dims.vocab < 3) throw std::invalid_argument("fixture needs N^w >= 3");
  if (spec.dims.items < 2) throw std::invalid_argument("fixture needs M >= 2");
  std::mt19937_64 rng(seed);
  for (std::size_t attempt = 1; attempt <= 1000; ++attempt) {
    GradFixture f = draw_fixture(spec, rng);
    f.attempts = attempt;
    if (fixture_relu_margin(f) >= spec.min_relu_margin) return f;
  }
  throw std::runtime_error("no gradient fixture clear of relu kinks after 1000 draws");
}

double fixture_relu_margin(const GradFixture& f) {
  double margin = std::numeric_limits<double>::infinity();
  const ModelInputs in = f.inputs();
  const double delta = effective_delta(f.variant, f.delta);
  for (const auto& ex : f.batch) {
    const PairForward fwd = forward_pair(f.params, f.variant, in.features, ex.user, ex.item);
    if (fwd.attention) {
      for (double s : fwd.attention->scores.values()) margin = std::min(margin, std::abs(s));
    }
    const Review* review = ex.label == 1 && delta > 0.0 ? f.reviews.find(ex.user, ex.item) : nullptr;
    if (review != nullptr) {
      const TextInputs text{f.params.user_embedding.row(ex.user),
                            f.params.item_embedding.row(ex.item), fwd.image.span()};
      review_log_likelihood(f.params, review->tokens, f.end_token, text, 0.0, nullptr, {},
                            &margin);
    }
  }
  return margin;
}

GradCheckReport check_joint_gradients(const GradFixture& f, double tolerance, double epsilon,
                                      std::optional<ParamGroup> flip) {
  const ModelInputs in = f.inputs();
  ModelParams grads = ModelParams::zeros(f.params.dims);
  joint_objective(f.params, in, f.batch, f.delta, f.lambda, &grads);
  if (flip) {
    grads.for_each_tensor([&](std::string_view, ParamGroup g, std::span<double> v) {
      if (g == *flip) {
        for (double& x : v) x = -x;
      }
    });
  }

  ModelParams scratch = f.params;
  const ScalarFunction fn = [&](const DenseVector& flat) {
    unflatten(flat, scratch);
    return joint_objective(scratch, in, f.batch, f.delta, f.lambda, nullptr).total;
  };
  const DenseVector numeric = finite_diff_grad(fn, flatten(f.params), epsilon);
  const DenseVector analytic = flatten(grads);

  GradCheckReport report;
  for (ParamGroup g : kGroups) report.groups.push_back({g, 0, 0.0, true});
  std::size_t offset = 0;
  grads.for_each_tensor([&](std::string_view, ParamGroup g, std::span<const double> v) {
    auto& check = *std::find_if(report.groups.begin(), report.groups.end(),
                                [&](const GroupCheck& c) { return c.group == g; });
    for (std::size_t k = 0; k < v.size(); ++k, ++offset) {
      const double err = relative_error(analytic[offset], numeric[offset]);
      check.max_relative_error = std::max(check.max_relative_error, err);
      ++check.coordinates;
    }
  });
  report.passed = true;
  for (auto& c : report.groups) {
    c.passed = c.max_relative_error < tolerance;
    report.passed = report.passed && c.passed;
  }
  return report;
}

std::optional<ParamGroup> parse_param_group(std::string_view name) {
  for (ParamGroup g : kGroups) {
    if (group_name(g) == name) return g;
  }
  return std::nullopt;
}

}  // namespace vexrec
