#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace vexrec {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interaction {
  std::size_t user = 0;
  std::size_t item = 0;
  std::optional<std::int64_t> timestamp;
};

// Implicit feedback: the set of (user, item) purchases, with raw string ids
// densified to 0-based indices in order of first appearance.
class InteractionSet {
 public:
  InteractionSet() = default;

  // Builds from already-dense indices; ids become the decimal index strings
  // unless given. Duplicate pairs are collapsed and counted.
  static InteractionSet from_pairs(std::size_t num_users, std::size_t num_items,
                                   const std::vector<Interaction>& pairs,
                                   std::vector<std::string> user_ids = {},
                                   std::vector<std::string> item_ids = {});

  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }
  std::size_t size() const { return records_.size(); }
  bool has_timestamps() const { return has_timestamps_; }
  std::size_t duplicates_dropped() const { return duplicates_; }

  const std::vector<Interaction>& records() const { return records_; }
  // Sorted item indices of one user's positives.
  const std::vector<std::size_t>& items_of(std::size_t user) const { return by_user_[user]; }
  bool contains(std::size_t user, std::size_t item) const;

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  std::optional<std::size_t> user_index(const std::string& raw) const;
  std::optional<std::size_t> item_index(const std::string& raw) const;

 private:
  friend InteractionSet load_interactions(std::istream& in);

  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::size_t> user_lookup_;
  std::unordered_map<std::string, std::size_t> item_lookup_;
  std::vector<Interaction> records_;
  std::vector<std::vector<std::size_t>> by_user_;
  bool has_timestamps_ = false;
  std::size_t duplicates_ = 0;
};

// TSV `user<TAB>item[<TAB>unix_ts]`. Malformed lines raise DataError naming the
// line number; an input without a single interaction raises "no interactions".
InteractionSet load_interactions(std::istream& in);
InteractionSet load_interactions(const std::filesystem::path& path);
void write_interactions(std::ostream& out, const InteractionSet& set);
void write_interactions(const std::filesystem::path& path, const InteractionSet& set);

class Vocabulary {
 public:
  // Reserved symbols are appended after the regular tokens.
  static constexpr const char* kEndToken = "</s>";
  static constexpr const char* kUnknownToken = "<unk>";

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> regular_tokens);

  std::size_t size() const { return index_to_token_.size(); }
  std::size_t end_index() const { return end_index_; }
  std::size_t unknown_index() const { return unknown_index_; }

  // Unknown tokens map to unknown_index().
  std::size_t index_of(const std::string& token) const;
  const std::string& token_at(std::size_t index) const { return index_to_token_.at(index); }
  const std::vector<std::string>& tokens() const { return index_to_token_; }

 private:
  std::vector<std::string> index_to_token_;
  std::unordered_map<std::string, std::size_t> token_to_index_;
  std::size_t end_index_ = 0;
  std::size_t unknown_index_ = 0;
};

// Tokens ordered by descending frequency, ties broken lexicographically, and
// only those occurring at least min_count times. Throws on an empty corpus.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_streams,
                            std::size_t min_count = 1);

struct Review {
  std::size_t user = 0;
  std::size_t item = 0;
  std::vector<std::size_t> tokens;

  std::size_t length() const { return tokens.size(); }
};

struct RawReview {
  std::string user_id;
  std::string item_id;
  std::vector<std::string> tokens;
};

// `user<TAB>item<TAB>space-separated tokens`
std::vector<RawReview> load_raw_reviews(std::istream& in);
std::vector<RawReview> load_raw_reviews(const std::filesystem::path& path);
void write_raw_reviews(std::ostream& out, const std::vector<RawReview>& reviews);

struct EncodedReviews {
  std::vector<Review> reviews;
  std::size_t skipped_unknown_pair = 0;  // user or item absent from the interactions
  std::size_t skipped_empty = 0;         // no tokens at all
};

EncodedReviews encode_reviews(const std::vector<RawReview>& raw, const InteractionSet& set,
                              const Vocabulary& vocab);

// Owns the encoded reviews and looks them up by (user, item).
class ReviewTable {
 public:
  ReviewTable() = default;
  ReviewTable(std::vector<Review> reviews, std::size_t num_items);

  const Review* find(std::size_t user, std::size_t item) const;
  const std::vector<Review>& all() const { return reviews_; }
  std::size_t size() const { return reviews_.size(); }
  bool empty() const { return reviews_.empty(); }

 private:
  std::vector<Review> reviews_;
  std::size_t num_items_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> positions_;
};

struct SplitPlan {
  std::vector<std::vector<std::size_t>> train;  // per user
  std::vector<std::vector<std::size_t>> test;   // per user
  std::uint64_t seed = 0;

  bool is_train(std::size_t user, std::size_t item) const;
  std::size_t num_train() const;
};

// floor(fraction · n) train items, clamped so that every user keeps at least
// one training item and, with two or more items, at least one test item.
// Chronological when the set carries timestamps, seeded shuffle otherwise.
SplitPlan split_per_user(const InteractionSet& set, double fraction, std::uint64_t seed);
std::size_t train_count_for(std::size_t num_items, double fraction);

// Human-labelled explanation regions on a coarse grid_side × grid_side grid.
struct RegionLabelSet {
  std::size_t user = 0;
  std::size_t item = 0;
  std::size_t grid_side = 5;
  std::vector<std::size_t> cells;
};

struct RawRegionLabel {
  std::string user_id;
  std::string item_id;
  std::size_t grid_side = 0;
  std::vector<std::size_t> cells;
};

// `user<TAB>item<TAB>grid_side<TAB>comma-separated cells`
std::vector<RawRegionLabel> load_region_labels(std::istream& in);
std::vector<RawRegionLabel> load_region_labels(const std::filesystem::path& path);
void write_region_labels(std::ostream& out, const std::vector<RawRegionLabel>& labels);

// Drops labels whose user or item is unknown to the interaction set.
std::vector<RegionLabelSet> resolve_region_labels(const std::vector<RawRegionLabel>& raw,
                                                  const InteractionSet& set);

}  // namespace vexrec
