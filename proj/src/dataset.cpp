#include "vexrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace vexrec {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string at_line(std::size_t n) { return "line " + std::to_string(n) + ": "; }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

template <typename Int>
bool parse_int(const std::string& s, Int& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::uint64_t pair_key(std::size_t user, std::size_t item, std::size_t num_items) {
  return static_cast<std::uint64_t>(user) * static_cast<std::uint64_t>(num_items) + item;
}

}  // namespace

// ---------------------------------------------------------------------------
// InteractionSet

InteractionSet InteractionSet::from_pairs(std::size_t num_users, std::size_t num_items,
                                          const std::vector<Interaction>& pairs,
                                          std::vector<std::string> user_ids,
                                          std::vector<std::string> item_ids) {
  InteractionSet set;
  if (user_ids.empty()) {
    for (std::size_t u = 0; u < num_users; ++u) user_ids.push_back("u" + std::to_string(u));
  }
  if (item_ids.empty()) {
    for (std::size_t i = 0; i < num_items; ++i) item_ids.push_back("i" + std::to_string(i));
  }
  if (user_ids.size() != num_users || item_ids.size() != num_items) {
    throw DataError("from_pairs: id table size does not match dimensions");
  }
  set.user_ids_ = std::move(user_ids);
  set.item_ids_ = std::move(item_ids);
  for (std::size_t u = 0; u < num_users; ++u) set.user_lookup_[set.user_ids_[u]] = u;
  for (std::size_t i = 0; i < num_items; ++i) set.item_lookup_[set.item_ids_[i]] = i;
  set.by_user_.assign(num_users, {});

  std::unordered_set<std::uint64_t> seen;
  bool any_ts = false;
  bool all_ts = true;
  for (const auto& p : pairs) {
    if (p.user >= num_users || p.item >= num_items) {
      throw DataError("from_pairs: index out of range (" + std::to_string(p.user) + ", " +
                      std::to_string(p.item) + ")");
    }
    if (!seen.insert(pair_key(p.user, p.item, num_items)).second) {
      ++set.duplicates_;
      continue;
    }
    any_ts = any_ts || p.timestamp.has_value();
    all_ts = all_ts && p.timestamp.has_value();
    set.records_.push_back(p);
    set.by_user_[p.user].push_back(p.item);
  }
  if (set.records_.empty()) throw DataError("no interactions");
  if (any_ts && !all_ts) throw DataError("timestamps present on some interactions only");
  set.has_timestamps_ = all_ts;
  for (std::size_t u = 0; u < num_users; ++u) {
    if (set.by_user_[u].empty()) {
      throw DataError("user " + set.user_ids_[u] + " has no positive interaction");
    }
    std::sort(set.by_user_[u].begin(), set.by_user_[u].end());
  }
  return set;
}

bool InteractionSet::contains(std::size_t user, std::size_t item) const {
  const auto& items = by_user_.at(user);
  return std::binary_search(items.begin(), items.end(), item);
}

std::optional<std::size_t> InteractionSet::user_index(const std::string& raw) const {
  auto it = user_lookup_.find(raw);
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> InteractionSet::item_index(const std::string& raw) const {
  auto it = item_lookup_.find(raw);
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

InteractionSet load_interactions(std::istream& in) {
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, std::size_t> users;
  std::unordered_map<std::string, std::size_t> items;
  std::vector<Interaction> pairs;

  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> timestamped;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw DataError(at_line(line_no) + "expected user<TAB>item[<TAB>timestamp]");
    }
    Interaction rec;
    if (fields.size() == 3) {
      std::int64_t ts = 0;
      if (!parse_int(fields[2], ts)) {
        throw DataError(at_line(line_no) + "timestamp '" + fields[2] + "' is not an integer");
      }
      rec.timestamp = ts;
    }
    if (timestamped.has_value() && *timestamped != rec.timestamp.has_value()) {
      throw DataError(at_line(line_no) + "timestamp column present on some lines only");
    }
    timestamped = rec.timestamp.has_value();

    auto [uit, unew] = users.try_emplace(fields[0], user_ids.size());
    if (unew) user_ids.push_back(fields[0]);
    auto [iit, inew] = items.try_emplace(fields[1], item_ids.size());
    if (inew) item_ids.push_back(fields[1]);
    rec.user = uit->second;
    rec.item = iit->second;
    pairs.push_back(rec);
  }
  if (pairs.empty()) throw DataError("no interactions");
  const std::size_t nu = user_ids.size();
  const std::size_t ni = item_ids.size();
  return InteractionSet::from_pairs(nu, ni, pairs, std::move(user_ids), std::move(item_ids));
}

InteractionSet load_interactions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_interactions(in);
}

void write_interactions(std::ostream& out, const InteractionSet& set) {
  for (const auto& r : set.records()) {
    out << set.user_ids()[r.user] << '\t' << set.item_ids()[r.item];
    if (r.timestamp) out << '\t' << *r.timestamp;
    out << '\n';
  }
}

void write_interactions(const std::filesystem::path& path, const InteractionSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_interactions(out, set);
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> regular_tokens)
    : index_to_token_(std::move(regular_tokens)) {
  for (std::size_t i = 0; i < index_to_token_.size(); ++i) {
    if (!token_to_index_.emplace(index_to_token_[i], i).second) {
      throw DataError("vocabulary: duplicate token '" + index_to_token_[i] + "'");
    }
  }
  end_index_ = index_to_token_.size();
  index_to_token_.emplace_back(kEndToken);
  unknown_index_ = index_to_token_.size();
  index_to_token_.emplace_back(kUnknownToken);
}

std::size_t Vocabulary::index_of(const std::string& token) const {
  auto it = token_to_index_.find(token);
  return it == token_to_index_.end() ? unknown_index_ : it->second;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_streams,
                            std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& stream : token_streams) {
    for (const auto& tok : stream) ++counts[tok];
  }
  if (counts.empty()) throw DataError("build_vocabulary: empty corpus");

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  // std::map iteration is already lexicographic; stable sort keeps that order
  // among equal counts.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [tok, n] : kept) tokens.push_back(tok);
  return Vocabulary(std::move(tokens));
}

// ---------------------------------------------------------------------------
// Reviews

std::vector<RawReview> load_raw_reviews(std::istream& in) {
  std::vector<RawReview> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    const auto first = line.find('\t');
    const auto second = first == std::string::npos ? first : line.find('\t', first + 1);
    if (second == std::string::npos || first == 0 || second == first + 1) {
      throw DataError(at_line(line_no) + "expected user<TAB>item<TAB>tokens");
    }
    RawReview r;
    r.user_id = line.substr(0, first);
    r.item_id = line.substr(first + 1, second - first - 1);
    r.tokens = split_whitespace(line.substr(second + 1));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RawReview> load_raw_reviews(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_raw_reviews(in);
}

void write_raw_reviews(std::ostream& out, const std::vector<RawReview>& reviews) {
  for (const auto& r : reviews) {
    out << r.user_id << '\t' << r.item_id << '\t';
    for (std::size_t i = 0; i < r.tokens.size(); ++i) {
      if (i) out << ' ';
      out << r.tokens[i];
    }
    out << '\n';
  }
}

EncodedReviews encode_reviews(const std::vector<RawReview>& raw, const InteractionSet& set,
                              const Vocabulary& vocab) {
  EncodedReviews out;
  for (const auto& r : raw) {
    const auto u = set.user_index(r.user_id);
    const auto i = set.item_index(r.item_id);
    if (!u || !i) {
      ++out.skipped_unknown_pair;
      continue;
    }
    if (r.tokens.empty()) {
      ++out.skipped_empty;
      continue;
    }
    Review enc;
    enc.user = *u;
    enc.item = *i;
    enc.tokens.reserve(r.tokens.size());
    for (const auto& t : r.tokens) enc.tokens.push_back(vocab.index_of(t));
    out.reviews.push_back(std::move(enc));
  }
  return out;
}

ReviewTable::ReviewTable(std::vector<Review> reviews, std::size_t num_items)
    : reviews_(std::move(reviews)), num_items_(num_items) {
  for (std::size_t k = 0; k < reviews_.size(); ++k) {
    // A repeated pair keeps its first review.
    positions_.try_emplace(pair_key(reviews_[k].user, reviews_[k].item, num_items_), k);
  }
}

const Review* ReviewTable::find(std::size_t user, std::size_t item) const {
  auto it = positions_.find(pair_key(user, item, num_items_));
  return it == positions_.end() ? nullptr : &reviews_[it->second];
}

// ---------------------------------------------------------------------------
// Splits

bool SplitPlan::is_train(std::size_t user, std::size_t item) const {
  const auto& items = train.at(user);
  return std::binary_search(items.begin(), items.end(), item);
}

std::size_t SplitPlan::num_train() const {
  std::size_t n = 0;
  for (const auto& t : train) n += t.size();
  return n;
}

std::size_t train_count_for(std::size_t num_items, double fraction) {
  if (num_items == 0) return 0;
  auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(num_items) + 1e-9));
  k = std::max<std::size_t>(k, 1);
  if (num_items >= 2) k = std::min(k, num_items - 1);
  return k;
}

SplitPlan split_per_user(const InteractionSet& set, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split_per_user: fraction must be in (0,1)");
  }
  SplitPlan plan;
  plan.seed = seed;
  plan.train.resize(set.num_users());
  plan.test.resize(set.num_users());

  std::vector<std::vector<std::pair<std::int64_t, std::size_t>>> dated;
  if (set.has_timestamps()) {
    dated.resize(set.num_users());
    for (const auto& r : set.records()) dated[r.user].emplace_back(*r.timestamp, r.item);
  }

  std::mt19937_64 rng(seed);
  for (std::size_t u = 0; u < set.num_users(); ++u) {
    std::vector<std::size_t> order;
    if (set.has_timestamps()) {
      auto& d = dated[u];
      std::sort(d.begin(), d.end());
      for (const auto& [ts, item] : d) order.push_back(item);
    } else {
      order = set.items_of(u);
      std::shuffle(order.begin(), order.end(), rng);
    }
    const std::size_t k = train_count_for(order.size(), fraction);
    plan.train[u].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    plan.test[u].assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
    std::sort(plan.train[u].begin(), plan.train[u].end());
    std::sort(plan.test[u].begin(), plan.test[u].end());
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Region labels

std::vector<RawRegionLabel> load_region_labels(std::istream& in) {
  std::vector<RawRegionLabel> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw DataError(at_line(line_no) + "expected user<TAB>item<TAB>grid_side<TAB>cells");
    }
    RawRegionLabel lab;
    lab.user_id = fields[0];
    lab.item_id = fields[1];
    if (!parse_int(fields[2], lab.grid_side) || lab.grid_side == 0) {
      throw DataError(at_line(line_no) + "invalid grid_side '" + fields[2] + "'");
    }
    std::set<std::size_t> cells;
    std::stringstream ss(fields[3]);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t c = 0;
      if (!parse_int(cell, c) || c >= lab.grid_side * lab.grid_side) {
        throw DataError(at_line(line_no) + "invalid cell index '" + cell + "'");
      }
      cells.insert(c);
    }
    if (cells.empty()) throw DataError(at_line(line_no) + "no labelled cells");
    lab.cells.assign(cells.begin(), cells.end());
    out.push_back(std::move(lab));
  }
  return out;
}

std::vector<RawRegionLabel> load_region_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_region_labels(in);
}

void write_region_labels(std::ostream& out, const std::vector<RawRegionLabel>& labels) {
  for (const auto& l : labels) {
    out << l.user_id << '\t' << l.item_id << '\t' << l.grid_side << '\t';
    for (std::size_t i = 0; i < l.cells.size(); ++i) {
      if (i) out << ',';
      out << l.cells[i];
    }
    out << '\n';
  }
}

std::vector<RegionLabelSet> resolve_region_labels(const std::vector<RawRegionLabel>& raw,
                                                  const InteractionSet& set) {
  std::vector<RegionLabelSet> out;
  for (const auto& r : raw) {
    const auto u = set.user_index(r.user_id);
    const auto i = set.item_index(r.item_id);
    if (!u || !i) continue;
    out.push_back({*u, *i, r.grid_side, r.cells});
  }
  return out;
}

}  // namespace vexrec
