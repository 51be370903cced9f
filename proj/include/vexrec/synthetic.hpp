#pragma once

// Planted-preference synthetic data. Every user belongs to one of a few
// archetypes; every item is either styled after one archetype or plain.
// Styled items carry their archetype's pattern on a few planted regions, and
// all items carry a distractor pattern of similar norm elsewhere. Users buy
// items of their own style with high probability and anything else rarely.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "vexrec/dataset.hpp"
#include "vexrec/feature_store.hpp"

namespace vexrec {

struct SynthConfig {
  std::size_t users = 30;
  std::size_t items = 60;
  std::size_t regions = 16;      // h, must be a perfect square
  std::size_t feature_dim = 8;   // D, at least archetypes + 1
  std::size_t vocab = 24;        // regular review tokens
  std::size_t archetypes = 2;
  std::size_t planted_regions = 2;
  std::size_t distractor_regions = 2;
  std::size_t review_length = 8;
  double match_probability = 0.6;
  double other_probability = 0.02;
  double noise = 0.05;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SynthDataset {
  InteractionSet interactions;
  std::vector<RawReview> reviews;  // one per interaction
  RegionalFeatureStore features;
  // Planted cells per (user, item) for users buying their own style; the grid
  // is the fine √h × √h grid itself.
  std::vector<RegionLabelSet> ground_truth;
  std::vector<std::size_t> user_archetype;
  std::vector<std::size_t> item_style;  // == archetypes for plain items
  std::vector<std::vector<std::size_t>> planted;  // per item, sorted
};

SynthDataset generate_synthetic(const SynthConfig& config);

std::vector<RawRegionLabel> raw_ground_truth(const SynthDataset& data);

struct SynthPaths {
  std::filesystem::path interactions, reviews, features, labels;
};
SynthPaths synth_paths(const std::filesystem::path& dir);

// Interactions are written item-major so that first appearance in the file
// reproduces the feature store's row order.
void write_synthetic(const std::filesystem::path& dir, const SynthDataset& data);

}  // namespace vexrec
