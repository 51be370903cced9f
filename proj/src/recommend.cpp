#include "vexrec/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vexrec/vecf.hpp"
#include "json.hpp"

namespace vexrec {

namespace {

void check_model(const ScoringModel& model) {
  if (model.params == nullptr) throw std::invalid_argument("scoring model has no parameters");
  if (uses_image(model.variant) && model.features == nullptr) {
    throw std::invalid_argument("variant " + std::string(variant_name(model.variant)) +
                                " needs regional features");
  }
}

std::size_t grid_side_of(const AttentionMap& map) {
  const auto g = exact_sqrt(map.weights.dim());
  if (!g) throw std::invalid_argument("attention map is not a square grid");
  return *g;
}

}  // namespace

std::vector<double> score_all_items(const ScoringModel& model, std::size_t user) {
  check_model(model);
  const std::size_t items = model.params->dims.items;
  std::vector<double> scores(items);
  for (std::size_t i = 0; i < items; ++i) {
    scores[i] = forward_pair(*model.params, model.variant, model.features, user, i).logit;
  }
  return scores;
}

RecommendationList recommend_top_n(const ScoringModel& model, std::size_t user,
                                   std::span<const std::size_t> excluded, std::size_t n) {
  check_model(model);
  if (user >= model.params->dims.users) throw std::out_of_range("unknown user index");
  const auto scores = score_all_items(model, user);
  std::vector<std::size_t> pool;
  pool.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::binary_search(excluded.begin(), excluded.end(), i)) pool.push_back(i);
  }
  const std::size_t k = std::min(n, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  RecommendationList out;
  out.user = user;
  out.items.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  for (std::size_t i : out.items) out.scores.push_back(scores[i]);
  return out;
}

std::vector<RecommendationList> recommend_serial(
    const ScoringModel& model, std::span<const std::size_t> users,
    const std::vector<std::vector<std::size_t>>& excluded, std::size_t n) {
  std::vector<RecommendationList> out;
  out.reserve(users.size());
  for (std::size_t u : users) out.push_back(recommend_top_n(model, u, excluded.at(u), n));
  return out;
}

std::vector<RecommendationList> recommend_parallel(
    const ScoringModel& model, std::span<const std::size_t> users,
    const std::vector<std::vector<std::size_t>>& excluded, std::size_t n) {
  check_model(model);
  for (std::size_t u : users) {
    if (u >= excluded.size() || u >= model.params->dims.users) {
      throw std::out_of_range("unknown user index");
    }
  }
  std::vector<RecommendationList> out(users.size());
  const auto count = static_cast<long long>(users.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < count; ++k) {
    const auto u = users[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = recommend_top_n(model, u, excluded[u], n);
  }
  return out;
}

std::vector<AttentionMap> attention_maps_serial(const ScoringModel& model,
                                                std::span<const UserItem> pairs) {
  check_model(model);
  if (model.features == nullptr) throw std::invalid_argument("attention needs regional features");
  std::vector<AttentionMap> out;
  out.reserve(pairs.size());
  for (const auto& [u, i] : pairs) {
    out.push_back(attention_map(model.params->user_embedding.row(u), model.features->grid(i),
                                model.params->attention, u, i));
  }
  return out;
}

std::vector<AttentionMap> attention_maps_parallel(const ScoringModel& model,
                                                  std::span<const UserItem> pairs) {
  check_model(model);
  if (model.features == nullptr) throw std::invalid_argument("attention needs regional features");
  std::vector<AttentionMap> out(pairs.size());
  const auto count = static_cast<long long>(pairs.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < count; ++k) {
    const auto& [u, i] = pairs[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = attention_map(
        model.params->user_embedding.row(u), model.features->grid(i), model.params->attention, u, i);
  }
  return out;
}

std::string heatmap_json(const AttentionMap& map, const std::string& user_id,
                         const std::string& item_id, std::size_t top_k) {
  nlohmann::ordered_json j;
  j["user"] = user_id;
  j["item"] = item_id;
  j["grid_side"] = grid_side_of(map);
  j["weights"] = map.weights.values();
  j["top_cells"] = top_k_indices(map.weights.span(), top_k);
  j["fallback"] = map.fallback;
  return j.dump(2);
}

std::string heatmap_pgm(const AttentionMap& map) {
  const std::size_t g = grid_side_of(map);
  const auto& w = map.weights.values();
  const double peak = *std::max_element(w.begin(), w.end());
  std::string out = "P5\n" + std::to_string(g) + " " + std::to_string(g) + "\n255\n";
  for (double a : w) {
    const double v = peak > 0.0 ? std::round(255.0 * a / peak) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(v, 0.0, 255.0))));
  }
  return out;
}

}  // namespace vexrec
