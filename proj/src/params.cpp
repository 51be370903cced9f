#include "vexrec/params.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace vexrec {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Vecf: return "vecf";
    case Variant::ReCf: return "re-cf";
    case Variant::ReVecf: return "re-vecf";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "vecf") return Variant::Vecf;
  if (name == "re-cf") return Variant::ReCf;
  if (name == "re-vecf") return Variant::ReVecf;
  return std::nullopt;
}

std::string_view group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::User: return "P";
    case ParamGroup::Item: return "Q";
    case ParamGroup::Projection: return "W_img_proj";
    case ParamGroup::Attention: return "attention";
    case ParamGroup::Gru: return "gru";
    case ParamGroup::ContextGate: return "context_gate";
    case ParamGroup::Output: return "W_out";
  }
  return "unknown";
}

std::optional<InitScheme> parse_init_scheme(std::string_view name) {
  if (name == "uniform01") return InitScheme::Uniform01;
  if (name == "scaled") return InitScheme::ScaledUniform;
  return std::nullopt;
}

ModelParams ModelParams::zeros(const ModelDims& d) {
  if (d.embed == 0) throw std::invalid_argument("embedding dimension K must be at least 1");
  ModelParams p;
  p.dims = d;
  p.user_embedding = DenseMatrix(d.users, d.embed);
  p.item_embedding = DenseMatrix(d.items, d.embed);
  p.image_projection = DenseMatrix(d.feature_dim, d.embed);
  p.attention.w_user = DenseVector(d.embed);
  p.attention.w_region = DenseVector(d.feature_dim);
  p.attention.bias = 0.0;

  auto& g = p.gru;
  g.w_z = g.w_r = g.w_h = DenseMatrix(d.hidden, d.word_dim);
  g.u_z = g.u_r = g.u_h = DenseMatrix(d.hidden, d.hidden);
  g.v_z = g.v_r = DenseMatrix(d.hidden, d.feature_dim);
  g.b_z = g.b_r = g.b_h = DenseVector(d.hidden);
  g.embedding = DenseMatrix(d.word_dim, d.vocab);
  g.w_out = DenseMatrix(d.vocab, d.hidden);
  g.b_out = DenseVector(d.vocab);

  p.gate.w_user = DenseMatrix(d.embed, d.feature_dim);
  p.gate.w_item = DenseMatrix(d.embed, d.feature_dim);
  p.gate.w_image = DenseMatrix(d.feature_dim, d.feature_dim);
  p.gate.w_hidden = DenseVector(d.hidden);
  p.gate.bias = DenseVector(d.feature_dim);
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](std::string_view, ParamGroup, std::span<const double> v) { n += v.size(); });
  return n;
}

double ModelParams::squared_norm() const {
  double s = 0.0;
  for_each_tensor([&](std::string_view, ParamGroup, std::span<const double> v) {
    s += vexrec::squared_norm(v);
  });
  return s;
}

void ModelParams::set_zero() {
  for_each_tensor([](std::string_view, ParamGroup, std::span<double> v) {
    std::fill(v.begin(), v.end(), 0.0);
  });
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each_tensor([&](std::string_view, ParamGroup, std::span<const double> v) {
    ok = ok && vexrec::all_finite(v);
  });
  return ok;
}

ModelParams init_params(const ModelDims& dims, InitScheme scheme, double scale,
                        std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(dims);
  std::mt19937_64 rng(seed);
  const double lo = scheme == InitScheme::Uniform01 ? 0.0 : -scale;
  const double hi = scheme == InitScheme::Uniform01 ? 1.0 : scale;
  std::uniform_real_distribution<double> dist(lo, hi);
  p.for_each_tensor([&](std::string_view, ParamGroup, std::span<double> v) {
    for (double& x : v) x = dist(rng);
  });
  return p;
}

DenseVector flatten(const ModelParams& p) {
  std::vector<double> flat;
  flat.reserve(p.parameter_count());
  p.for_each_tensor([&](std::string_view, ParamGroup, std::span<const double> v) {
    flat.insert(flat.end(), v.begin(), v.end());
  });
  return DenseVector(std::move(flat));
}

void unflatten(const DenseVector& flat, ModelParams& p) {
  if (flat.dim() != p.parameter_count()) {
    throw ShapeError("unflatten: " + std::to_string(flat.dim()) + " values for " +
                     std::to_string(p.parameter_count()) + " parameters");
  }
  std::size_t offset = 0;
  p.for_each_tensor([&](std::string_view, ParamGroup, std::span<double> v) {
    std::copy_n(flat.values().begin() + static_cast<std::ptrdiff_t>(offset), v.size(), v.begin());
    offset += v.size();
  });
}

void add_scaled(ModelParams& p, const ModelParams& g, double scale) {
  if (!(p.dims == g.dims)) throw ShapeError("add_scaled: parameter dimensions differ");
  std::vector<std::span<const double>> grads;
  g.for_each_tensor(
      [&](std::string_view, ParamGroup, std::span<const double> v) { grads.push_back(v); });
  std::size_t k = 0;
  p.for_each_tensor([&](std::string_view, ParamGroup, std::span<double> v) {
    axpy(scale, grads[k++], v);
  });
}

}  // namespace vexrec
