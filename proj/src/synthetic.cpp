#include "vexrec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace vexrec {

void SynthConfig::validate() const {
  if (users == 0 || items == 0) throw std::invalid_argument("synth: empty user or item set");
  if (!exact_sqrt(regions)) {
    throw std::invalid_argument("synth: regions must be a perfect square, got " +
                                std::to_string(regions));
  }
  if (archetypes == 0) throw std::invalid_argument("synth: need at least one archetype");
  if (feature_dim < archetypes + 1) {
    throw std::invalid_argument("synth: feature_dim must be at least archetypes + 1");
  }
  if (planted_regions == 0 || planted_regions + distractor_regions > regions) {
    throw std::invalid_argument("synth: planted and distractor regions must fit in the image");
  }
  if (vocab < archetypes + 1) throw std::invalid_argument("synth: vocabulary too small");
  if (review_length == 0) throw std::invalid_argument("synth: review_length must be positive");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(match_probability) || !prob(other_probability)) {
    throw std::invalid_argument("synth: probabilities must lie in [0,1]");
  }
  if (!(noise >= 0.0)) throw std::invalid_argument("synth: noise must be non-negative");
}

SynthDataset generate_synthetic(const SynthConfig& c) {
  c.validate();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthDataset out;
  const std::size_t plain = c.archetypes;
  out.user_archetype.resize(c.users);
  for (std::size_t u = 0; u < c.users; ++u) out.user_archetype[u] = u % c.archetypes;
  out.item_style.resize(c.items);
  for (std::size_t i = 0; i < c.items; ++i) out.item_style[i] = i % (c.archetypes + 1);
  std::shuffle(out.item_style.begin(), out.item_style.end(), rng);

  // Feature dims split into archetypes + 1 blocks; the last block (plus any
  // remainder) holds the distractor pattern.
  const std::size_t block = c.feature_dim / (c.archetypes + 1);
  auto pattern_dims = [&](std::size_t style) {
    const std::size_t begin = style * block;
    const std::size_t end = style == plain ? c.feature_dim : begin + block;
    return std::pair{begin, end};
  };

  out.features = RegionalFeatureStore(c.items, c.regions, c.feature_dim);
  out.planted.resize(c.items);
  std::vector<std::size_t> cells(c.regions);
  for (std::size_t i = 0; i < c.items; ++i) {
    auto grid = out.features.mutable_grid(i);
    for (double& v : grid) v = c.noise * unit(rng);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    const std::size_t styled = out.item_style[i] == plain ? 0 : c.planted_regions;
    auto paint = [&](std::size_t region, std::size_t style) {
      const auto [begin, end] = pattern_dims(style);
      const double level = 1.0 / std::sqrt(static_cast<double>(end - begin));
      for (std::size_t d = begin; d < end; ++d) grid[region * c.feature_dim + d] += level;
    };
    for (std::size_t k = 0; k < styled; ++k) paint(cells[k], out.item_style[i]);
    for (std::size_t k = styled; k < styled + c.distractor_regions; ++k) paint(cells[k], plain);
    out.planted[i].assign(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(styled));
    std::sort(out.planted[i].begin(), out.planted[i].end());
  }

  std::vector<std::vector<char>> owns(c.users, std::vector<char>(c.items, 0));
  for (std::size_t u = 0; u < c.users; ++u) {
    for (std::size_t i = 0; i < c.items; ++i) {
      const bool match = out.item_style[i] == out.user_archetype[u];
      owns[u][i] = unit(rng) < (match ? c.match_probability : c.other_probability);
    }
  }
  // Every user gets at least two purchases so that a test item exists, and
  // every item at least one buyer so that it shows up in the interactions.
  for (std::size_t u = 0; u < c.users; ++u) {
    std::vector<std::size_t> own_style;
    for (std::size_t i = 0; i < c.items; ++i) {
      if (out.item_style[i] == out.user_archetype[u] && !owns[u][i]) own_style.push_back(i);
    }
    std::shuffle(own_style.begin(), own_style.end(), rng);
    auto count = [&] { return static_cast<std::size_t>(std::count(owns[u].begin(), owns[u].end(), 1)); };
    for (std::size_t k = 0; count() < 2 && k < own_style.size(); ++k) owns[u][own_style[k]] = 1;
    for (std::size_t i = 0; count() < 2 && i < c.items; ++i) owns[u][i] = 1;
  }
  for (std::size_t i = 0; i < c.items; ++i) {
    bool bought = false;
    for (std::size_t u = 0; u < c.users && !bought; ++u) bought = owns[u][i];
    if (bought) continue;
    std::vector<std::size_t> fans;
    for (std::size_t u = 0; u < c.users; ++u) {
      if (out.item_style[i] == plain || out.user_archetype[u] == out.item_style[i]) fans.push_back(u);
    }
    if (fans.empty()) fans.push_back(0);
    owns[fans[std::uniform_int_distribution<std::size_t>(0, fans.size() - 1)(rng)]][i] = 1;
  }

  std::vector<Interaction> pairs;
  for (std::size_t u = 0; u < c.users; ++u) {
    for (std::size_t i = 0; i < c.items; ++i) {
      if (owns[u][i]) pairs.push_back({u, i, std::nullopt});
    }
  }
  std::vector<std::string> user_ids(c.users), item_ids(c.items);
  for (std::size_t u = 0; u < c.users; ++u) user_ids[u] = "u" + std::to_string(u);
  for (std::size_t i = 0; i < c.items; ++i) item_ids[i] = "i" + std::to_string(i);
  out.interactions = InteractionSet::from_pairs(c.users, c.items, pairs, user_ids, item_ids);

  // Token t belongs to group t mod (archetypes + 1); the last group is shared.
  std::vector<std::vector<std::string>> groups(c.archetypes + 1);
  for (std::size_t t = 0; t < c.vocab; ++t) {
    groups[t % (c.archetypes + 1)].push_back("w" + std::to_string(t));
  }
  auto pick = [&](const std::vector<std::string>& g) -> const std::string& {
    return g[std::uniform_int_distribution<std::size_t>(0, g.size() - 1)(rng)];
  };
  for (const auto& p : pairs) {
    const std::size_t style =
        out.item_style[p.item] == plain ? out.user_archetype[p.user] : out.item_style[p.item];
    RawReview r{user_ids[p.user], item_ids[p.item], {}};
    for (std::size_t k = 0; k < c.review_length; ++k) {
      r.tokens.push_back(unit(rng) < 0.6 ? pick(groups[style]) : pick(groups[plain]));
    }
    out.reviews.push_back(std::move(r));

    if (out.item_style[p.item] == out.user_archetype[p.user]) {
      out.ground_truth.push_back({p.user, p.item, *exact_sqrt(c.regions), out.planted[p.item]});
    }
  }
  return out;
}

std::vector<RawRegionLabel> raw_ground_truth(const SynthDataset& data) {
  std::vector<RawRegionLabel> out;
  for (const auto& g : data.ground_truth) {
    out.push_back({data.interactions.user_ids()[g.user], data.interactions.item_ids()[g.item],
                   g.grid_side, g.cells});
  }
  return out;
}

SynthPaths synth_paths(const std::filesystem::path& dir) {
  return {dir / "interactions.tsv", dir / "reviews.tsv", dir / "features.vxrf",
          dir / "labels.tsv"};
}

void write_synthetic(const std::filesystem::path& dir, const SynthDataset& data) {
  std::filesystem::create_directories(dir);
  const SynthPaths paths = synth_paths(dir);

  std::vector<Interaction> records = data.interactions.records();
  std::stable_sort(records.begin(), records.end(),
                   [](const Interaction& a, const Interaction& b) { return a.item < b.item; });
  {
    std::ofstream out(paths.interactions);
    for (const auto& r : records) {
      out << data.interactions.user_ids()[r.user] << '\t' << data.interactions.item_ids()[r.item]
          << '\n';
    }
    if (!out) throw std::runtime_error("cannot write " + paths.interactions.string());
  }
  {
    std::ofstream out(paths.reviews);
    write_raw_reviews(out, data.reviews);
    if (!out) throw std::runtime_error("cannot write " + paths.reviews.string());
  }
  write_feature_store(paths.features, data.features);
  {
    std::ofstream out(paths.labels);
    write_region_labels(out, raw_ground_truth(data));
    if (!out) throw std::runtime_error("cannot write " + paths.labels.string());
  }
}

}  // namespace vexrec
