#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vexrec/attention.hpp"
#include "vexrec/feature_store.hpp"
#include "vexrec/metrics.hpp"
#include "vexrec/params.hpp"

namespace vexrec {

struct ScoringModel {
  const ModelParams* params = nullptr;
  Variant variant = Variant::ReVecf;
  const RegionalFeatureStore* features = nullptr;  // null only when image-free
};

// Logit p·q* for every item.
std::vector<double> score_all_items(const ScoringModel& model, std::size_t user);

// Top-n by descending score with ties to the lower item index, skipping the
// sorted `excluded` items. Returns fewer than n when the pool is smaller.
RecommendationList recommend_top_n(const ScoringModel& model, std::size_t user,
                                   std::span<const std::size_t> excluded, std::size_t n);

// One list per user in `users`; excluded[u] is indexed by user.
std::vector<RecommendationList> recommend_serial(
    const ScoringModel& model, std::span<const std::size_t> users,
    const std::vector<std::vector<std::size_t>>& excluded, std::size_t n);
std::vector<RecommendationList> recommend_parallel(
    const ScoringModel& model, std::span<const std::size_t> users,
    const std::vector<std::vector<std::size_t>>& excluded, std::size_t n);

struct UserItem {
  std::size_t user = 0;
  std::size_t item = 0;
};

std::vector<AttentionMap> attention_maps_serial(const ScoringModel& model,
                                                std::span<const UserItem> pairs);
std::vector<AttentionMap> attention_maps_parallel(const ScoringModel& model,
                                                  std::span<const UserItem> pairs);

// {user, item, grid_side, weights (row-major), top_cells}
std::string heatmap_json(const AttentionMap& map, const std::string& user_id,
                         const std::string& item_id, std::size_t top_k = 5);
// Binary 8-bit graymap, one pixel per cell, value round(255·α/max α).
std::string heatmap_pgm(const AttentionMap& map);

}  // namespace vexrec
