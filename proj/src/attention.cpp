#include "vexrec/attention.hpp"

#include <string>

#include "vexrec/numerics.hpp"

namespace vexrec {

namespace {

void check_shapes(std::span<const double> user_embedding, const FeatureGrid& features,
                  const AttentionParams& params) {
  if (features.regions == 0) throw ShapeError("attention: image has no regions (h=0)");
  if (user_embedding.size() != params.w_user.dim()) {
    throw ShapeError("attention: user embedding [" + std::to_string(user_embedding.size()) +
                     "] vs w_user " + shape_string(params.w_user));
  }
  if (features.dim != params.w_region.dim()) {
    throw ShapeError("attention: region features [" + std::to_string(features.dim) +
                     "] vs w_region " + shape_string(params.w_region));
  }
}

}  // namespace

AttentionForward attention_forward(std::span<const double> user_embedding,
                                   const FeatureGrid& features, const AttentionParams& params,
                                   std::size_t user, std::size_t item) {
  check_shapes(user_embedding, features, params);
  const std::size_t h = features.regions;
  AttentionForward fwd;
  fwd.scores = DenseVector(h);
  fwd.activations = DenseVector(h);
  const double user_term = dot(params.w_user.span(), user_embedding) + params.bias;
  for (std::size_t k = 0; k < h; ++k) {
    fwd.scores[k] = user_term + dot(params.w_region.span(), features.region(k));
    fwd.activations[k] = relu(fwd.scores[k]);
    fwd.total += fwd.activations[k];
  }

  fwd.map.user = user;
  fwd.map.item = item;
  fwd.map.weights = DenseVector(h);
  if (fwd.total < kAttentionFallbackThreshold) {
    fwd.map.fallback = true;
    fwd.map.weights.fill(1.0 / static_cast<double>(h));
  } else {
    for (std::size_t k = 0; k < h; ++k) fwd.map.weights[k] = fwd.activations[k] / fwd.total;
  }
  fwd.image = merged_image(fwd.map, features);
  return fwd;
}

AttentionMap attention_map(std::span<const double> user_embedding, const FeatureGrid& features,
                           const AttentionParams& params, std::size_t user, std::size_t item) {
  return attention_forward(user_embedding, features, params, user, item).map;
}

DenseVector merged_image(const AttentionMap& map, const FeatureGrid& features) {
  if (map.weights.dim() != features.regions) {
    throw ShapeError("merged_image: " + std::to_string(map.weights.dim()) + " weights for " +
                     std::to_string(features.regions) + " regions");
  }
  DenseVector image(features.dim);
  for (std::size_t k = 0; k < features.regions; ++k) {
    axpy(map.weights[k], features.region(k), image.span());
  }
  return image;
}

void attention_backward(const AttentionForward& fwd, std::span<const double> user_embedding,
                        const FeatureGrid& features, const AttentionParams& params,
                        std::span<const double> d_image, std::span<const double> d_alpha,
                        std::span<double> d_user, AttentionParams& d_params,
                        std::span<double> d_features) {
  const std::size_t h = features.regions;
  const std::size_t d = features.dim;
  const auto& alpha = fwd.map.weights;

  // IMAGE = Σ α_k f_k
  DenseVector g_alpha(h);
  for (std::size_t k = 0; k < h; ++k) {
    g_alpha[k] = d_alpha.empty() ? 0.0 : d_alpha[k];
    if (!d_image.empty()) g_alpha[k] += dot(d_image, features.region(k));
  }
  if (!d_features.empty() && !d_image.empty()) {
    for (std::size_t k = 0; k < h; ++k) {
      axpy(alpha[k], d_image, d_features.subspan(k * d, d));
    }
  }
  if (fwd.map.fallback) return;

  // α_k = a_k / S  ⇒  ∂/∂a_k = (g_k − Σ_κ g_κ α_κ) / S
  double weighted = 0.0;
  for (std::size_t k = 0; k < h; ++k) weighted += g_alpha[k] * alpha[k];

  double g_shared = 0.0;  // Σ_k ∂/∂s_k, the gradient on the user term and bias
  for (std::size_t k = 0; k < h; ++k) {
    if (!(fwd.scores[k] > 0.0)) continue;
    const double g_s = (g_alpha[k] - weighted) / fwd.total;
    g_shared += g_s;
    axpy(g_s, features.region(k), d_params.w_region.span());
    if (!d_features.empty()) axpy(g_s, params.w_region.span(), d_features.subspan(k * d, d));
  }
  axpy(g_shared, user_embedding, d_params.w_user.span());
  if (!d_user.empty()) axpy(g_shared, params.w_user.span(), d_user);
  d_params.bias += g_shared;
}

}  // namespace vexrec
