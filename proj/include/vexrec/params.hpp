#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "vexrec/linalg.hpp"

namespace vexrec {

enum class Variant : std::uint32_t {
  Vecf = 0,    // image attention + implicit feedback
  ReCf = 1,    // reviews + implicit feedback, no image
  ReVecf = 2,  // image attention + reviews + implicit feedback
};

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
inline bool uses_image(Variant v) { return v != Variant::ReCf; }
inline bool uses_text(Variant v) { return v != Variant::Vecf; }

struct ModelDims {
  std::size_t users = 0;        // N
  std::size_t items = 0;        // M
  std::size_t embed = 0;        // K
  std::size_t feature_dim = 0;  // D
  std::size_t regions = 0;      // h
  std::size_t hidden = 0;       // Z
  std::size_t vocab = 0;        // N^w
  std::size_t word_dim = 0;     // O

  bool operator==(const ModelDims&) const = default;
};

enum class ParamGroup { User, Item, Projection, Attention, Gru, ContextGate, Output };
std::string_view group_name(ParamGroup g);

struct AttentionParams {
  DenseVector w_user;    // K
  DenseVector w_region;  // D
  double bias = 0.0;

  bool operator==(const AttentionParams&) const = default;
};

struct GruParams {
  DenseMatrix w_z, w_r, w_h;  // Z×O, word input
  DenseMatrix u_z, u_r, u_h;  // Z×Z, recurrence
  DenseMatrix v_z, v_r;       // Z×D, visual context into the gates
  DenseVector b_z, b_r, b_h;  // Z
  DenseMatrix embedding;      // O×N^w, column w is word w
  DenseMatrix w_out;          // N^w×Z
  DenseVector b_out;          // N^w

  bool operator==(const GruParams&) const = default;
};

struct ContextGateParams {
  DenseMatrix w_user;    // K×D
  DenseMatrix w_item;    // K×D
  DenseMatrix w_image;   // D×D
  DenseVector w_hidden;  // Z
  DenseVector bias;      // D

  bool operator==(const ContextGateParams&) const = default;
};

// Every learnable tensor of the model. The same type doubles as the gradient
// accumulator, which keeps parameter updates and checkpointing uniform.
struct ModelParams {
  ModelDims dims;
  DenseMatrix user_embedding;    // P, N×K
  DenseMatrix item_embedding;    // Q, M×K
  DenseMatrix image_projection;  // D×K, maps the merged image into item space
  AttentionParams attention;
  GruParams gru;
  ContextGateParams gate;

  static ModelParams zeros(const ModelDims& dims);

  // Visits (name, group, values) for every tensor in a fixed order.
  template <typename F>
  void for_each_tensor(F&& f);
  template <typename F>
  void for_each_tensor(F&& f) const;

  std::size_t parameter_count() const;
  double squared_norm() const;
  void set_zero();
  bool all_finite() const;

  bool operator==(const ModelParams&) const = default;
};

template <typename F>
void ModelParams::for_each_tensor(F&& f) {
  f("P", ParamGroup::User, user_embedding.span());
  f("Q", ParamGroup::Item, item_embedding.span());
  f("W_img_proj", ParamGroup::Projection, image_projection.span());
  f("att.w_user", ParamGroup::Attention, attention.w_user.span());
  f("att.w_region", ParamGroup::Attention, attention.w_region.span());
  f("att.bias", ParamGroup::Attention, std::span<double>(&attention.bias, 1));
  f("gru.W_z", ParamGroup::Gru, gru.w_z.span());
  f("gru.W_r", ParamGroup::Gru, gru.w_r.span());
  f("gru.W_h", ParamGroup::Gru, gru.w_h.span());
  f("gru.U_z", ParamGroup::Gru, gru.u_z.span());
  f("gru.U_r", ParamGroup::Gru, gru.u_r.span());
  f("gru.U_h", ParamGroup::Gru, gru.u_h.span());
  f("gru.V_z", ParamGroup::Gru, gru.v_z.span());
  f("gru.V_r", ParamGroup::Gru, gru.v_r.span());
  f("gru.b_z", ParamGroup::Gru, gru.b_z.span());
  f("gru.b_r", ParamGroup::Gru, gru.b_r.span());
  f("gru.b_h", ParamGroup::Gru, gru.b_h.span());
  f("gru.E", ParamGroup::Gru, gru.embedding.span());
  f("out.W", ParamGroup::Output, gru.w_out.span());
  f("out.b", ParamGroup::Output, gru.b_out.span());
  f("ctx.W_user", ParamGroup::ContextGate, gate.w_user.span());
  f("ctx.W_item", ParamGroup::ContextGate, gate.w_item.span());
  f("ctx.W_image", ParamGroup::ContextGate, gate.w_image.span());
  f("ctx.w_hidden", ParamGroup::ContextGate, gate.w_hidden.span());
  f("ctx.bias", ParamGroup::ContextGate, gate.bias.span());
}

template <typename F>
void ModelParams::for_each_tensor(F&& f) const {
  const_cast<ModelParams*>(this)->for_each_tensor(
      [&](std::string_view name, ParamGroup g, std::span<double> v) {
        f(name, g, std::span<const double>(v));
      });
}

enum class InitScheme {
  Uniform01,      // U(0,1) for every entry
  ScaledUniform,  // U(−scale, scale)
};

std::optional<InitScheme> parse_init_scheme(std::string_view name);

ModelParams init_params(const ModelDims& dims, InitScheme scheme, double scale,
                        std::uint64_t seed);

// Flattening used by the finite-difference checker and by tests.
DenseVector flatten(const ModelParams& p);
void unflatten(const DenseVector& flat, ModelParams& p);

// p += scale · g, tensor by tensor.
void add_scaled(ModelParams& p, const ModelParams& g, double scale);

}  // namespace vexrec
