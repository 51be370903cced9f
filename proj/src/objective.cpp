#include "vexrec/objective.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "vexrec/text_gru.hpp"

namespace vexrec {

namespace {

struct DataTerms {
  double bce = 0.0;
  double review = 0.0;
};

void accumulate_pair(const ModelParams& params, const ModelInputs& inputs, const LabeledPair& ex,
                     double delta, ModelParams* grads, DataTerms& terms) {
  const PairForward fwd = forward_pair(params, inputs.variant, inputs.features, ex.user, ex.item);
  terms.bce += bce_term(fwd.logit, ex.label);

  const Review* review = nullptr;
  if (ex.label == 1 && delta > 0.0 && inputs.reviews != nullptr) {
    review = inputs.reviews->find(ex.user, ex.item);
  }
  const TextInputs text{params.user_embedding.row(ex.user), params.item_embedding.row(ex.item),
                        fwd.image.span()};

  if (grads == nullptr) {
    if (review != nullptr) {
      terms.review +=
          review_log_likelihood(params, review->tokens, inputs.end_token, text, 0.0, nullptr, {});
    }
    return;
  }

  DenseVector d_image;
  if (review != nullptr) {
    const bool image_path = fwd.attention.has_value();
    if (image_path) d_image = DenseVector(params.dims.feature_dim);
    const TextGradients text_grads{grads->user_embedding.row(ex.user),
                                   grads->item_embedding.row(ex.item),
                                   image_path ? d_image.span() : std::span<double>()};
    terms.review += review_log_likelihood(params, review->tokens, inputs.end_token, text, delta,
                                          grads, text_grads);
  }
  backward_pair(params, fwd, inputs.features, (1.0 - delta) * bce_term_grad(fwd.logit, ex.label),
                d_image.span(), *grads);
}

ObjectiveBreakdown finish(const ModelParams& params, const DataTerms& terms, double delta,
                          double lambda, ModelParams* grads) {
  ObjectiveBreakdown out;
  out.bce = terms.bce;
  out.review = terms.review;
  out.total = (1.0 - delta) * terms.bce;
  if (delta > 0.0) out.total += delta * terms.review;
  out.regularizer = regularize(params, lambda, grads);
  out.total -= out.regularizer;
  return out;
}

void check_delta(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in [0,1]");
  }
}

}  // namespace

double effective_delta(Variant variant, double delta) {
  return uses_text(variant) ? delta : 0.0;
}

ObjectiveBreakdown joint_objective(const ModelParams& params, const ModelInputs& inputs,
                                   std::span<const LabeledPair> batch, double delta,
                                   double lambda, ModelParams* grads) {
  check_delta(delta);
  const double d = effective_delta(inputs.variant, delta);
  DataTerms terms;
  for (const auto& ex : batch) accumulate_pair(params, inputs, ex, d, grads, terms);
  return finish(params, terms, d, lambda, grads);
}

ObjectiveBreakdown joint_objective_parallel(const ModelParams& params, const ModelInputs& inputs,
                                            std::span<const LabeledPair> batch, double delta,
                                            double lambda, ModelParams* grads,
                                            std::size_t chunks) {
  check_delta(delta);
  const double d = effective_delta(inputs.variant, delta);
  const std::size_t n = batch.size();
  chunks = std::max<std::size_t>(1, std::min(chunks, n));

  std::vector<DataTerms> chunk_terms(chunks);
  std::vector<ModelParams> chunk_grads;
  if (grads != nullptr) chunk_grads.assign(chunks, ModelParams::zeros(params.dims));

  const auto num_chunks = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < num_chunks; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const std::size_t begin = cu * n / chunks;
    const std::size_t end = (cu + 1) * n / chunks;
    ModelParams* g = grads != nullptr ? &chunk_grads[cu] : nullptr;
    for (std::size_t k = begin; k < end; ++k) {
      accumulate_pair(params, inputs, batch[k], d, g, chunk_terms[cu]);
    }
  }

  DataTerms terms;
  for (std::size_t c = 0; c < chunks; ++c) {
    terms.bce += chunk_terms[c].bce;
    terms.review += chunk_terms[c].review;
    if (grads != nullptr) add_scaled(*grads, chunk_grads[c], 1.0);
  }
  return finish(params, terms, d, lambda, grads);
}

}  // namespace vexrec
