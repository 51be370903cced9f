#pragma once

// Multi-task objective, maximised:
//   l = δ Σ_reviews log p(review) + (1 − δ) Σ_pairs BCE − λ‖Θ‖²
// Review terms are only taken for positive pairs that have a review. The
// image-only variant has no text task and behaves as δ = 0.

#include <cstddef>
#include <span>

#include "vexrec/dataset.hpp"
#include "vexrec/feature_store.hpp"
#include "vexrec/params.hpp"
#include "vexrec/vecf.hpp"

namespace vexrec {

struct ModelInputs {
  Variant variant = Variant::ReVecf;
  const RegionalFeatureStore* features = nullptr;  // required unless image-free
  const ReviewTable* reviews = nullptr;            // may be null: no review terms
  std::size_t end_token = 0;
};

struct ObjectiveBreakdown {
  double total = 0.0;        // weighted data terms − regularizer
  double bce = 0.0;          // unweighted Σ BCE terms
  double review = 0.0;       // unweighted Σ review log-likelihoods
  double regularizer = 0.0;  // λ‖Θ‖²
};

double effective_delta(Variant variant, double delta);

// Serial reference. Gradients of `total` are accumulated into grads if given.
ObjectiveBreakdown joint_objective(const ModelParams& params, const ModelInputs& inputs,
                                   std::span<const LabeledPair> batch, double delta,
                                   double lambda, ModelParams* grads);

// Same quantity with the batch split into `chunks` contiguous slices evaluated
// by OpenMP workers and reduced in slice order, so the result depends on the
// chunk count only, never on the thread count.
ObjectiveBreakdown joint_objective_parallel(const ModelParams& params, const ModelInputs& inputs,
                                            std::span<const LabeledPair> batch, double delta,
                                            double lambda, ModelParams* grads,
                                            std::size_t chunks = 8);

}  // namespace vexrec
