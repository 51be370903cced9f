#include "vexrec/vecf.hpp"

#include <stdexcept>
#include <string>

#include "vexrec/numerics.hpp"

namespace vexrec {

DenseVector merge(const DenseVector& item_embedding, const DenseVector& image,
                  const DenseMatrix& image_projection) {
  const DenseVector projected = matvec_transposed(image_projection, image);
  if (projected.dim() != item_embedding.dim()) {
    throw ShapeError("merge: item embedding " + shape_string(item_embedding) +
                     " vs projected image " + shape_string(projected));
  }
  return hadamard(item_embedding, projected);
}

double predict(const DenseVector& user_embedding, const DenseVector& merged_item) {
  if (user_embedding.dim() != merged_item.dim()) {
    throw ShapeError("predict: " + shape_string(user_embedding) + " vs " +
                     shape_string(merged_item));
  }
  return sigmoid(dot(user_embedding.span(), merged_item.span()));
}

PairForward forward_pair(const ModelParams& params, Variant variant,
                         const RegionalFeatureStore* features, std::size_t user,
                         std::size_t item) {
  const std::size_t k_dim = params.dims.embed;
  PairForward fwd;
  fwd.user = user;
  fwd.item = item;
  const auto p = params.user_embedding.row(user);
  const auto q = params.item_embedding.row(item);

  fwd.merged_item = DenseVector(k_dim);
  if (uses_image(variant)) {
    if (features == nullptr) throw std::invalid_argument("variant requires image features");
    fwd.attention = attention_forward(p, features->grid(item), params.attention, user, item);
    fwd.image = fwd.attention->image;
    fwd.projected = DenseVector(k_dim);
    matvec_transposed_add(params.image_projection, fwd.image.span(), fwd.projected.span());
    for (std::size_t c = 0; c < k_dim; ++c) fwd.merged_item[c] = q[c] * fwd.projected[c];
  } else {
    fwd.image = DenseVector(params.dims.feature_dim);
    for (std::size_t c = 0; c < k_dim; ++c) fwd.merged_item[c] = q[c];
  }
  fwd.logit = dot(p, fwd.merged_item.span());
  fwd.score = sigmoid(fwd.logit);
  return fwd;
}

void backward_pair(const ModelParams& params, const PairForward& fwd,
                   const RegionalFeatureStore* features, double d_logit,
                   std::span<const double> d_image, ModelParams& grads) {
  const std::size_t k_dim = params.dims.embed;
  const auto p = params.user_embedding.row(fwd.user);
  const auto q = params.item_embedding.row(fwd.item);
  auto g_p = grads.user_embedding.row(fwd.user);
  auto g_q = grads.item_embedding.row(fwd.item);

  // logit = pᵀ q*
  axpy(d_logit, fwd.merged_item.span(), g_p);
  if (!fwd.attention) {
    axpy(d_logit, p, g_q);
    return;
  }

  // q* = q ∘ projected, projected = Wᵀ IMAGE
  DenseVector g_projected(k_dim);
  for (std::size_t c = 0; c < k_dim; ++c) {
    const double g_qstar = d_logit * p[c];
    g_q[c] += g_qstar * fwd.projected[c];
    g_projected[c] = g_qstar * q[c];
  }
  outer_add(grads.image_projection, fwd.image.span(), g_projected.span());
  DenseVector g_image(params.dims.feature_dim);
  matvec_add(params.image_projection, g_projected.span(), g_image.span());
  if (!d_image.empty()) axpy(1.0, d_image, g_image.span());

  attention_backward(*fwd.attention, p, features->grid(fwd.item), params.attention,
                     g_image.span(), {}, g_p, grads.attention, {});
}

double bce_term(double logit, int label) {
  return label == 1 ? log_sigmoid(logit) : log_sigmoid(-logit);
}

double bce_term_grad(double logit, int label) {
  return static_cast<double>(label) - sigmoid(logit);
}

double regularize(const ModelParams& params, double lambda, ModelParams* grads) {
  if (lambda == 0.0) return 0.0;
  if (grads != nullptr) add_scaled(*grads, params, -2.0 * lambda);
  return lambda * params.squared_norm();
}

double bce_objective(const ModelParams& params, Variant variant,
                     const RegionalFeatureStore* features, std::span<const LabeledPair> batch,
                     double lambda, ModelParams* grads) {
  if (batch.empty()) throw std::invalid_argument("bce_objective: empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const PairForward fwd = forward_pair(params, variant, features, ex.user, ex.item);
    total += bce_term(fwd.logit, ex.label);
    if (grads != nullptr) {
      backward_pair(params, fwd, features, bce_term_grad(fwd.logit, ex.label), {}, *grads);
    }
  }
  total -= regularize(params, lambda, grads);
  return total;
}

std::vector<std::size_t> sample_negatives(std::span<const std::size_t> owned,
                                          std::size_t num_items, std::size_t count,
                                          std::mt19937_64& rng) {
  if (owned.size() >= num_items) {
    throw std::invalid_argument("sample_negatives: user owns every item");
  }
  const std::size_t pool = num_items - owned.size();
  std::uniform_int_distribution<std::size_t> dist(0, pool - 1);
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    // The r-th unowned item: shift past every owned index at or below it.
    std::size_t item = dist(rng);
    for (std::size_t o : owned) {
      if (o <= item) ++item;
      else break;
    }
    out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> sample_negatives(const InteractionSet& positives, std::size_t user,
                                          std::size_t count, std::mt19937_64& rng) {
  return sample_negatives(positives.items_of(user), positives.num_items(), count, rng);
}

}  // namespace vexrec
