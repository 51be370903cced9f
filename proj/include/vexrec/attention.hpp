#pragma once

// User-conditioned attention over the regional features of one item image.
//
//   s_k = w_userᵀ p + w_regionᵀ f_k + b
//   a_k = relu(s_k)
//   α_k = a_k / Σ a
//
// When every a_k is zero the map falls back to uniform 1/h and that branch is
// treated as constant by the backward pass.

#include <cstddef>
#include <span>

#include "vexrec/feature_store.hpp"
#include "vexrec/linalg.hpp"
#include "vexrec/params.hpp"

namespace vexrec {

inline constexpr double kAttentionFallbackThreshold = 1e-12;

struct AttentionMap {
  DenseVector weights;  // α, length h
  std::size_t user = 0;
  std::size_t item = 0;
  bool fallback = false;
};

// Forward values kept for the backward pass.
struct AttentionForward {
  DenseVector scores;       // s_k
  DenseVector activations;  // a_k
  double total = 0.0;       // Σ a_k
  AttentionMap map;
  DenseVector image;  // Σ α_k f_k
};

AttentionMap attention_map(std::span<const double> user_embedding, const FeatureGrid& features,
                           const AttentionParams& params, std::size_t user = 0,
                           std::size_t item = 0);

DenseVector merged_image(const AttentionMap& map, const FeatureGrid& features);

AttentionForward attention_forward(std::span<const double> user_embedding,
                                   const FeatureGrid& features, const AttentionParams& params,
                                   std::size_t user = 0, std::size_t item = 0);

// Accumulates (+=) gradients given upstream gradients on the merged image
// and, optionally, directly on α. Empty spans skip the corresponding output.
void attention_backward(const AttentionForward& fwd, std::span<const double> user_embedding,
                        const FeatureGrid& features, const AttentionParams& params,
                        std::span<const double> d_image, std::span<const double> d_alpha,
                        std::span<double> d_user, AttentionParams& d_params,
                        std::span<double> d_features);

}  // namespace vexrec
