#include "vexrec/text_gru.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vexrec/numerics.hpp"

namespace vexrec {

namespace {

void check_word(const GruParams& params, std::size_t word) {
  if (word >= params.embedding.cols()) {
    throw std::out_of_range("token " + std::to_string(word) + " outside vocabulary of " +
                            std::to_string(params.embedding.cols()));
  }
}

DenseVector embedding_column(const DenseMatrix& e, std::size_t word) {
  DenseVector x(e.rows());
  for (std::size_t o = 0; o < e.rows(); ++o) x[o] = e(o, word);
  return x;
}

// Pre-activation b + W x + U h [+ V c]
DenseVector gate_input(const DenseMatrix& w, const DenseMatrix& u, const DenseMatrix* v,
                       const DenseVector& b, const GruStepCache& c) {
  DenseVector a = b;
  if (c.word) matvec_add(w, c.x.span(), a.span());
  matvec_add(u, c.h_prev.span(), a.span());
  if (v != nullptr && !c.context.empty()) matvec_add(*v, c.context.span(), a.span());
  return a;
}

void gate_backward(const DenseVector& ga, const GruStepCache& c, const DenseMatrix& w,
                   const DenseMatrix& u, const DenseMatrix* v, DenseMatrix& gw, DenseMatrix& gu,
                   DenseMatrix* gv, DenseVector& gb, std::span<double> d_x,
                   std::span<double> d_h_prev, std::span<double> d_context) {
  if (c.word) {
    outer_add(gw, ga.span(), c.x.span());
    matvec_transposed_add(w, ga.span(), d_x);
  }
  outer_add(gu, ga.span(), c.h_prev.span());
  matvec_transposed_add(u, ga.span(), d_h_prev);
  if (v != nullptr && !c.context.empty()) {
    outer_add(*gv, ga.span(), c.context.span());
    if (!d_context.empty()) matvec_transposed_add(*v, ga.span(), d_context);
  }
  axpy(1.0, ga.span(), gb.span());
}

// W_userᵀ p + W_itemᵀ q
DenseVector embedding_term(const ContextGateParams& gate, std::span<const double> p,
                           std::span<const double> q) {
  DenseVector t(gate.bias.dim());
  matvec_transposed_add(gate.w_user, p, t.span());
  matvec_transposed_add(gate.w_item, q, t.span());
  return t;
}

DenseVector image_term(const ContextGateParams& gate, std::span<const double> image) {
  DenseVector t(gate.bias.dim());
  matvec_transposed_add(gate.w_image, image, t.span());
  return t;
}

DenseVector mix_initial(const DenseVector& emb, const DenseVector& img, const DenseVector& bias) {
  DenseVector pre(bias.dim());
  for (std::size_t d = 0; d < pre.dim(); ++d) pre[d] = 0.5 * (emb[d] + img[d]) + bias[d];
  return pre;
}

DenseVector mix_gated(const DenseVector& emb, const DenseVector& img, const DenseVector& bias,
                      double beta) {
  DenseVector pre(bias.dim());
  for (std::size_t d = 0; d < pre.dim(); ++d) {
    pre[d] = beta * emb[d] + (1.0 - beta) * img[d] + bias[d];
  }
  return pre;
}

DenseVector relu_vector(const DenseVector& pre) {
  DenseVector out(pre.dim());
  for (std::size_t d = 0; d < pre.dim(); ++d) out[d] = relu(pre[d]);
  return out;
}

DenseVector output_logits(const GruParams& params, std::span<const double> h) {
  DenseVector logits = params.b_out;
  matvec_add(params.w_out, h, logits.span());
  return logits;
}

std::size_t argmax_lowest(const DenseVector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.dim(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

GruStepCache gru_step_forward(const GruParams& params, std::span<const double> h_prev,
                              std::optional<std::size_t> word,
                              std::span<const double> context) {
  const std::size_t z_dim = params.b_z.dim();
  if (h_prev.size() != z_dim) {
    throw ShapeError("gru step: hidden state [" + std::to_string(h_prev.size()) + "] vs Z=" +
                     std::to_string(z_dim));
  }
  if (!context.empty() && context.size() != params.v_z.cols()) {
    throw ShapeError("gru step: context [" + std::to_string(context.size()) + "] vs V_z " +
                     shape_string(params.v_z));
  }
  GruStepCache c;
  c.h_prev = DenseVector(std::vector<double>(h_prev.begin(), h_prev.end()));
  c.word = word;
  if (word) {
    check_word(params, *word);
    c.x = embedding_column(params.embedding, *word);
  }
  if (!context.empty()) c.context = DenseVector(std::vector<double>(context.begin(), context.end()));

  c.z = gate_input(params.w_z, params.u_z, &params.v_z, params.b_z, c);
  c.r = gate_input(params.w_r, params.u_r, &params.v_r, params.b_r, c);
  for (std::size_t i = 0; i < z_dim; ++i) {
    c.z[i] = sigmoid(c.z[i]);
    c.r[i] = sigmoid(c.r[i]);
  }

  c.candidate = params.b_h;
  if (word) matvec_add(params.w_h, c.x.span(), c.candidate.span());
  const DenseVector reset_h = hadamard(c.r, c.h_prev);
  matvec_add(params.u_h, reset_h.span(), c.candidate.span());
  c.h = DenseVector(z_dim);
  for (std::size_t i = 0; i < z_dim; ++i) {
    c.candidate[i] = tanh_act(c.candidate[i]);
    c.h[i] = c.z[i] * c.h_prev[i] + (1.0 - c.z[i]) * c.candidate[i];
  }
  return c;
}

void gru_step_backward(const GruParams& params, const GruStepCache& c,
                       std::span<const double> d_h, GruParams& grads,
                       std::span<double> d_h_prev, std::span<double> d_context) {
  const std::size_t z_dim = c.h.dim();
  DenseVector g_z(z_dim), g_cand(z_dim);
  for (std::size_t i = 0; i < z_dim; ++i) {
    g_z[i] = d_h[i] * (c.h_prev[i] - c.candidate[i]);
    g_cand[i] = d_h[i] * (1.0 - c.z[i]);
    d_h_prev[i] += d_h[i] * c.z[i];
  }

  DenseVector d_x(c.x.dim());

  // candidate
  DenseVector ga_h(z_dim);
  for (std::size_t i = 0; i < z_dim; ++i) {
    ga_h[i] = g_cand[i] * (1.0 - c.candidate[i] * c.candidate[i]);
  }
  if (c.word) {
    outer_add(grads.w_h, ga_h.span(), c.x.span());
    matvec_transposed_add(params.w_h, ga_h.span(), d_x.span());
  }
  const DenseVector reset_h = hadamard(c.r, c.h_prev);
  outer_add(grads.u_h, ga_h.span(), reset_h.span());
  DenseVector g_reset_h(z_dim);
  matvec_transposed_add(params.u_h, ga_h.span(), g_reset_h.span());
  axpy(1.0, ga_h.span(), grads.b_h.span());

  DenseVector ga_z(z_dim), ga_r(z_dim);
  for (std::size_t i = 0; i < z_dim; ++i) {
    const double g_r = g_reset_h[i] * c.h_prev[i];
    d_h_prev[i] += g_reset_h[i] * c.r[i];
    ga_z[i] = g_z[i] * c.z[i] * (1.0 - c.z[i]);
    ga_r[i] = g_r * c.r[i] * (1.0 - c.r[i]);
  }
  gate_backward(ga_z, c, params.w_z, params.u_z, &params.v_z, grads.w_z, grads.u_z, &grads.v_z,
                grads.b_z, d_x.span(), d_h_prev, d_context);
  gate_backward(ga_r, c, params.w_r, params.u_r, &params.v_r, grads.w_r, grads.u_r, &grads.v_r,
                grads.b_r, d_x.span(), d_h_prev, d_context);

  if (c.word) {
    for (std::size_t o = 0; o < d_x.dim(); ++o) grads.embedding(o, *c.word) += d_x[o];
  }
}

DenseVector gru_step_standard(const GruParams& params, const DenseVector& h_prev,
                              std::size_t word) {
  return gru_step_forward(params, h_prev.span(), word, {}).h;
}

DenseVector gru_step_visual(const GruParams& params, const DenseVector& h_prev,
                            std::size_t word, const DenseVector& context) {
  return gru_step_forward(params, h_prev.span(), word, context.span()).h;
}

DenseVector initial_state(const GruParams& params, const DenseVector& context) {
  const DenseVector zero(params.b_z.dim());
  return gru_step_forward(params, zero.span(), std::nullopt, context.span()).h;
}

DenseVector word_distribution(const GruParams& params, const DenseVector& h) {
  return softmax(output_logits(params, h.span()));
}

double context_gate_beta(const ContextGateParams& gate, const DenseVector& h) {
  return sigmoid(dot(gate.w_hidden.span(), h.span()));
}

DenseVector context_vector_initial(const DenseVector& user_embedding,
                                   const DenseVector& item_embedding, const DenseVector& image,
                                   const ContextGateParams& gate) {
  return relu_vector(mix_initial(embedding_term(gate, user_embedding.span(), item_embedding.span()),
                                 image_term(gate, image.span()), gate.bias));
}

DenseVector context_vector_step(const DenseVector& user_embedding,
                                const DenseVector& item_embedding, const DenseVector& image,
                                const DenseVector& h, const ContextGateParams& gate) {
  const double beta = context_gate_beta(gate, h);
  return relu_vector(mix_gated(embedding_term(gate, user_embedding.span(), item_embedding.span()),
                               image_term(gate, image.span()), gate.bias, beta));
}

double review_log_likelihood(const ModelParams& params, std::span<const std::size_t> tokens,
                             std::size_t end_token, const TextInputs& inputs, double scale,
                             ModelParams* grads, const TextGradients& inputs_grad,
                             double* relu_margin) {
  if (tokens.empty()) throw std::invalid_argument("review_log_likelihood: empty review");
  const auto& gru = params.gru;
  const auto& gate = params.gate;
  const std::size_t z_dim = params.dims.hidden;
  const std::size_t d_dim = gate.bias.dim();

  std::vector<std::size_t> targets(tokens.begin(), tokens.end());
  targets.push_back(end_token);
  const std::size_t steps = targets.size();

  const DenseVector emb = embedding_term(gate, inputs.user, inputs.item);
  const DenseVector img = image_term(gate, inputs.image);

  struct Step {
    double beta = 0.5;
    DenseVector context_pre;
    GruStepCache gru;
    DenseVector probs;
  };
  std::vector<Step> trace(steps);

  double loglik = 0.0;
  DenseVector h(z_dim);
  for (std::size_t t = 0; t < steps; ++t) {
    Step& s = trace[t];
    if (t == 0) {
      s.context_pre = mix_initial(emb, img, gate.bias);
    } else {
      s.beta = sigmoid(dot(gate.w_hidden.span(), h.span()));
      s.context_pre = mix_gated(emb, img, gate.bias, s.beta);
    }
    const DenseVector context = relu_vector(s.context_pre);
    if (relu_margin != nullptr) {
      for (double v : s.context_pre.values()) *relu_margin = std::min(*relu_margin, std::abs(v));
    }
    const std::optional<std::size_t> prev_word =
        t == 0 ? std::nullopt : std::optional<std::size_t>(targets[t - 1]);
    s.gru = gru_step_forward(gru, h.span(), prev_word, context.span());
    h = s.gru.h;
    check_word(gru, targets[t]);
    const DenseVector logp = log_softmax(output_logits(gru, h.span()));
    loglik += logp[targets[t]];
    if (grads != nullptr) {
      s.probs = DenseVector(logp.dim());
      for (std::size_t w = 0; w < logp.dim(); ++w) s.probs[w] = std::exp(logp[w]);
    }
  }
  if (grads == nullptr) return loglik;

  GruParams& g = grads->gru;
  ContextGateParams& gg = grads->gate;
  DenseVector g_emb(d_dim), g_img(d_dim);
  DenseVector d_h(z_dim);  // gradient flowing into h_t from later steps
  for (std::size_t t = steps; t-- > 0;) {
    Step& s = trace[t];
    const auto& h_t = s.gru.h;

    DenseVector g_logits(s.probs.dim());
    for (std::size_t w = 0; w < g_logits.dim(); ++w) g_logits[w] = -scale * s.probs[w];
    g_logits[targets[t]] += scale;
    outer_add(g.w_out, g_logits.span(), h_t.span());
    axpy(1.0, g_logits.span(), g.b_out.span());
    matvec_transposed_add(gru.w_out, g_logits.span(), d_h.span());

    DenseVector d_h_prev(z_dim);
    DenseVector d_context(d_dim);
    gru_step_backward(gru, s.gru, d_h.span(), g, d_h_prev.span(), d_context.span());

    DenseVector g_pre(d_dim);
    for (std::size_t d = 0; d < d_dim; ++d) {
      g_pre[d] = s.context_pre[d] > 0.0 ? d_context[d] : 0.0;
    }
    axpy(1.0, g_pre.span(), gg.bias.span());
    if (t == 0) {
      axpy(0.5, g_pre.span(), g_emb.span());
      axpy(0.5, g_pre.span(), g_img.span());
    } else {
      const auto& h_prev = s.gru.h_prev;
      double g_beta = 0.0;
      for (std::size_t d = 0; d < d_dim; ++d) g_beta += g_pre[d] * (emb[d] - img[d]);
      axpy(s.beta, g_pre.span(), g_emb.span());
      axpy(1.0 - s.beta, g_pre.span(), g_img.span());
      const double g_gate = g_beta * s.beta * (1.0 - s.beta);
      axpy(g_gate, h_prev.span(), gg.w_hidden.span());
      axpy(g_gate, gate.w_hidden.span(), d_h_prev.span());
    }
    d_h = std::move(d_h_prev);
  }

  outer_add(gg.w_user, inputs.user, g_emb.span());
  outer_add(gg.w_item, inputs.item, g_emb.span());
  outer_add(gg.w_image, inputs.image, g_img.span());
  if (!inputs_grad.user.empty()) matvec_add(gate.w_user, g_emb.span(), inputs_grad.user);
  if (!inputs_grad.item.empty()) matvec_add(gate.w_item, g_emb.span(), inputs_grad.item);
  if (!inputs_grad.image.empty()) matvec_add(gate.w_image, g_img.span(), inputs_grad.image);
  return loglik;
}

std::vector<std::size_t> greedy_decode(const ModelParams& params, const TextInputs& inputs,
                                       std::size_t end_token, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("greedy_decode: max_len must be at least 1");
  const auto& gru = params.gru;
  const auto& gate = params.gate;
  const DenseVector emb = embedding_term(gate, inputs.user, inputs.item);
  const DenseVector img = image_term(gate, inputs.image);

  std::vector<std::size_t> out;
  DenseVector h(params.dims.hidden);
  std::optional<std::size_t> prev;
  for (std::size_t t = 0; t < max_len; ++t) {
    DenseVector pre;
    if (t == 0) {
      pre = mix_initial(emb, img, gate.bias);
    } else {
      pre = mix_gated(emb, img, gate.bias, sigmoid(dot(gate.w_hidden.span(), h.span())));
    }
    const DenseVector context = relu_vector(pre);
    h = gru_step_forward(gru, h.span(), prev, context.span()).h;
    const std::size_t next = argmax_lowest(output_logits(gru, h.span()));
    if (next == end_token) break;
    out.push_back(next);
    prev = next;
  }
  return out;
}

}  // namespace vexrec
