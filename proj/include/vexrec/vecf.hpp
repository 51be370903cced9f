#pragma once

// Base visually-explainable CF scorer.
//
//   IMAGE_j = Σ_k α_k f_k                 (attention.hpp)
//   q*_j    = q_j ∘ (W_img_projᵀ IMAGE_j)
//   ŷ_ij    = σ(p_iᵀ q*_j)
//
// The image-free variant skips attention and the merge entirely: q*_j = q_j.

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "vexrec/attention.hpp"
#include "vexrec/dataset.hpp"
#include "vexrec/feature_store.hpp"
#include "vexrec/linalg.hpp"
#include "vexrec/params.hpp"

namespace vexrec {

DenseVector merge(const DenseVector& item_embedding, const DenseVector& image,
                  const DenseMatrix& image_projection);

double predict(const DenseVector& user_embedding, const DenseVector& merged_item);

struct PairForward {
  std::size_t user = 0;
  std::size_t item = 0;
  std::optional<AttentionForward> attention;  // empty for the image-free variant
  DenseVector image;                          // merged image, zeros when image-free
  DenseVector projected;                      // W_img_projᵀ IMAGE, empty when image-free
  DenseVector merged_item;                    // q*
  double logit = 0.0;
  double score = 0.5;
};

// `features` may be null only for the image-free variant.
PairForward forward_pair(const ModelParams& params, Variant variant,
                         const RegionalFeatureStore* features, std::size_t user,
                         std::size_t item);

// Accumulates gradients of an objective whose derivative with respect to the
// logit is d_logit, plus an optional extra gradient arriving on IMAGE_j.
void backward_pair(const ModelParams& params, const PairForward& fwd,
                   const RegionalFeatureStore* features, double d_logit,
                   std::span<const double> d_image, ModelParams& grads);

struct LabeledPair {
  std::size_t user = 0;
  std::size_t item = 0;
  int label = 1;  // 1 purchased, 0 sampled negative
};

// log ŷ for label 1, log(1 − ŷ) for label 0, via the stable log-sigmoid.
double bce_term(double logit, int label);
// ∂ bce_term / ∂ logit
double bce_term_grad(double logit, int label);

// λ‖Θ‖²; when grads is given, also accumulates −2λΘ into it.
double regularize(const ModelParams& params, double lambda, ModelParams* grads);

// Σ_pos log ŷ + Σ_neg log(1 − ŷ) − λ‖Θ‖², to be maximised. Gradients of
// that quantity are accumulated into grads when provided.
double bce_objective(const ModelParams& params, Variant variant,
                     const RegionalFeatureStore* features, std::span<const LabeledPair> batch,
                     double lambda, ModelParams* grads);

// Uniform draws from the items the user does not own. `owned` must be sorted.
// Each draw consumes exactly one variate from rng.
std::vector<std::size_t> sample_negatives(std::span<const std::size_t> owned,
                                          std::size_t num_items, std::size_t count,
                                          std::mt19937_64& rng);
std::vector<std::size_t> sample_negatives(const InteractionSet& positives, std::size_t user,
                                          std::size_t count, std::mt19937_64& rng);

}  // namespace vexrec
