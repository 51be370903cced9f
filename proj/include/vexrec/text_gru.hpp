#pragma once

// Review modelling with a visually gated GRU.
//
// One step, with x = E[:, w_{t-1}] and visual context c:
//   z  = σ(W_z x + U_z h + V_z c + b_z)
//   r  = σ(W_r x + U_r h + V_r c + b_r)
//   h̃  = tanh(W_h x + U_h (r ∘ h) + b_h)
//   h' = z ∘ h + (1 − z) ∘ h̃
//
// The first step has no previous word and starts from h = 0. Context vectors
// mix user/item embeddings with the merged image through a scalar gate
// β = σ(w_hiddenᵀ h), fixed at 1/2 for the first step:
//   c⁰ = relu(½[W_userᵀp + W_itemᵀq + W_imageᵀ IMAGE] + b)
//   cᵗ = relu(β[W_userᵀp + W_itemᵀq] + (1 − β) W_imageᵀ IMAGE + b)
// Word probabilities are softmax(W_out h + b_out).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vexrec/linalg.hpp"
#include "vexrec/params.hpp"

namespace vexrec {

struct GruStepCache {
  DenseVector h_prev;
  std::optional<std::size_t> word;
  DenseVector x;        // embedding of `word`, empty without a word
  DenseVector context;  // empty without a context
  DenseVector z, r, candidate, h;
};

// `word` may be absent (first step) and `context` may be empty (plain GRU).
GruStepCache gru_step_forward(const GruParams& params, std::span<const double> h_prev,
                              std::optional<std::size_t> word,
                              std::span<const double> context);

// Accumulates parameter gradients into `grads` and input gradients into
// d_h_prev / d_context (the latter may be empty).
void gru_step_backward(const GruParams& params, const GruStepCache& cache,
                       std::span<const double> d_h, GruParams& grads,
                       std::span<double> d_h_prev, std::span<double> d_context);

DenseVector gru_step_standard(const GruParams& params, const DenseVector& h_prev,
                              std::size_t word);
DenseVector gru_step_visual(const GruParams& params, const DenseVector& h_prev,
                            std::size_t word, const DenseVector& context);
DenseVector initial_state(const GruParams& params, const DenseVector& context);

DenseVector word_distribution(const GruParams& params, const DenseVector& h);

double context_gate_beta(const ContextGateParams& gate, const DenseVector& h);
DenseVector context_vector_initial(const DenseVector& user_embedding,
                                   const DenseVector& item_embedding, const DenseVector& image,
                                   const ContextGateParams& gate);
DenseVector context_vector_step(const DenseVector& user_embedding,
                                const DenseVector& item_embedding, const DenseVector& image,
                                const DenseVector& h, const ContextGateParams& gate);

struct TextInputs {
  std::span<const double> user;   // p_i
  std::span<const double> item;   // q_j
  std::span<const double> image;  // IMAGE_j, all zeros for the image-free variant
};

struct TextGradients {
  std::span<double> user;
  std::span<double> item;
  std::span<double> image;
};

// Teacher-forced Σ_t log p(w_t | w_<t) over the review followed by the
// end-of-review token. When grads is given, scale · ∂/∂θ is accumulated into
// the text-model tensors of *grads and into `inputs_grad`. relu_margin, if
// given, is lowered to the smallest |pre-activation| of any context relu.
double review_log_likelihood(const ModelParams& params, std::span<const std::size_t> tokens,
                             std::size_t end_token, const TextInputs& inputs, double scale,
                             ModelParams* grads, const TextGradients& inputs_grad,
                             double* relu_margin = nullptr);

// Argmax decoding, lowest index on ties. Stops at the end token (not emitted)
// or after max_len steps.
std::vector<std::size_t> greedy_decode(const ModelParams& params, const TextInputs& inputs,
                                       std::size_t end_token, std::size_t max_len);

}  // namespace vexrec
