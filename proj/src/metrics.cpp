#include "vexrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "vexrec/feature_store.hpp"
#include "json.hpp"

namespace vexrec {

namespace {

const std::vector<std::size_t>& truth_of(const std::vector<std::vector<std::size_t>>& truth,
                                         std::size_t user) {
  if (user >= truth.size()) throw MetricError("recommendation for unknown user");
  return truth[user];
}

std::size_t count_hits(const std::vector<std::size_t>& items,
                       const std::vector<std::size_t>& relevant) {
  std::size_t hits = 0;
  for (std::size_t i : items) {
    if (std::find(relevant.begin(), relevant.end(), i) != relevant.end()) ++hits;
  }
  return hits;
}

std::set<std::vector<std::size_t>> ngram_set(std::span<const std::size_t> tokens, std::size_t n) {
  std::set<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return out;
}

}  // namespace

double harmonic_f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

PRF precision_recall_f1(std::span<const RecommendationList> recs,
                        const std::vector<std::vector<std::size_t>>& truth, F1Mode mode) {
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  std::size_t users = 0;
  for (const auto& rec : recs) {
    const auto& relevant = truth_of(truth, rec.user);
    if (relevant.empty()) continue;
    const std::size_t hits = count_hits(rec.items, relevant);
    const double p = rec.items.empty() ? 0.0 : static_cast<double>(hits) / rec.items.size();
    const double r = static_cast<double>(hits) / relevant.size();
    p_sum += p;
    r_sum += r;
    f_sum += harmonic_f1(p, r);
    ++users;
  }
  if (users == 0) throw MetricError("no user has held-out items");
  PRF out;
  out.precision = p_sum / users;
  out.recall = r_sum / users;
  out.f1 = mode == F1Mode::OfAverages ? harmonic_f1(out.precision, out.recall) : f_sum / users;
  return out;
}

double hit_ratio(std::span<const RecommendationList> recs,
                 const std::vector<std::vector<std::size_t>>& truth) {
  std::size_t users = 0, hit_users = 0;
  for (const auto& rec : recs) {
    const auto& relevant = truth_of(truth, rec.user);
    if (relevant.empty()) continue;
    ++users;
    if (count_hits(rec.items, relevant) > 0) ++hit_users;
  }
  if (users == 0) throw MetricError("no user has held-out items");
  return static_cast<double>(hit_users) / users;
}

double ndcg(std::span<const RecommendationList> recs,
            const std::vector<std::vector<std::size_t>>& truth, std::size_t n) {
  double sum = 0.0;
  std::size_t users = 0;
  for (const auto& rec : recs) {
    const auto& relevant = truth_of(truth, rec.user);
    if (relevant.empty()) continue;
    ++users;
    double dcg = 0.0;
    const std::size_t depth = std::min(n, rec.items.size());
    for (std::size_t r = 0; r < depth; ++r) {
      if (std::find(relevant.begin(), relevant.end(), rec.items[r]) != relevant.end()) {
        dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
      }
    }
    double ideal = 0.0;
    for (std::size_t r = 0; r < std::min(n, relevant.size()); ++r) {
      ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
    if (ideal > 0.0) sum += dcg / ideal;
  }
  if (users == 0) throw MetricError("no user has held-out items");
  return sum / users;
}

RougeScore rouge_n(std::span<const std::size_t> predicted, std::span<const std::size_t> reference,
                   std::size_t n) {
  if (n == 0) throw MetricError("rouge n must be positive");
  RougeScore out;
  if (predicted.size() < n || reference.size() < n) {
    out.too_short = true;
    return out;
  }
  const auto pred = ngram_set(predicted, n);
  const auto ref = ngram_set(reference, n);
  std::size_t common = 0;
  for (const auto& g : pred) common += ref.count(g);
  out.prf.precision = static_cast<double>(common) / pred.size();
  out.prf.recall = static_cast<double>(common) / ref.size();
  out.prf.f1 = harmonic_f1(out.prf.precision, out.prf.recall);
  return out;
}

std::size_t coarse_cell(std::size_t fine, std::size_t g, std::size_t grid_side) {
  if (g == 0 || grid_side == 0 || fine >= g * g) throw MetricError("cell outside grid");
  const std::size_t row = fine / g, col = fine % g;
  return (row * grid_side / g) * grid_side + col * grid_side / g;
}

std::vector<std::size_t> top_k_indices(std::span<const double> weights, std::size_t k) {
  std::vector<std::size_t> idx(weights.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return weights[a] > weights[b] || (weights[a] == weights[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

RegionScore region_explanation_score(std::span<const double> weights,
                                     const RegionLabelSet& labels, std::size_t k) {
  const auto g = exact_sqrt(weights.size());
  if (!g) throw MetricError("attention map of " + std::to_string(weights.size()) +
                            " cells is not a square grid");
  if (labels.grid_side == 0 || labels.grid_side > *g) {
    throw MetricError("label grid of side " + std::to_string(labels.grid_side) +
                      " does not fit a " + std::to_string(*g) + "-cell grid");
  }
  if (labels.cells.empty()) throw MetricError("empty region label set");
  if (k == 0) throw MetricError("k must be positive");
  std::vector<char> labelled(labels.grid_side * labels.grid_side, 0);
  for (std::size_t c : labels.cells) {
    if (c >= labelled.size()) throw MetricError("label cell outside grid");
    labelled[c] = 1;
  }

  std::size_t relevant = 0;
  for (std::size_t f = 0; f < weights.size(); ++f) {
    if (labelled[coarse_cell(f, *g, labels.grid_side)]) ++relevant;
  }

  const auto top = top_k_indices(weights, k);
  std::size_t hits = 0;
  double dcg = 0.0;
  for (std::size_t r = 0; r < top.size(); ++r) {
    if (labelled[coarse_cell(top[r], *g, labels.grid_side)]) {
      ++hits;
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
  }
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(top.size(), relevant); ++r) {
    ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }

  RegionScore out;
  out.precision = static_cast<double>(hits) / static_cast<double>(k);
  out.recall = static_cast<double>(hits) / static_cast<double>(relevant);
  out.f1 = harmonic_f1(out.precision, out.recall);
  out.ndcg = ideal > 0.0 ? dcg / ideal : 0.0;
  return out;
}

PRF random_list_baseline(const std::vector<std::size_t>& test_sizes,
                         const std::vector<std::size_t>& candidate_sizes, std::size_t n) {
  if (test_sizes.size() != candidate_sizes.size()) throw MetricError("size mismatch");
  double p = 0.0, r = 0.0;
  std::size_t users = 0;
  for (std::size_t u = 0; u < test_sizes.size(); ++u) {
    if (test_sizes[u] == 0) continue;
    const double c = static_cast<double>(candidate_sizes[u]);
    p += static_cast<double>(test_sizes[u]) / c;
    r += static_cast<double>(std::min(n, candidate_sizes[u])) / c;
    ++users;
  }
  if (users == 0) throw MetricError("no user has held-out items");
  PRF out{p / users, r / users, 0.0};
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

std::string metric_report_json(const MetricReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, value] : report) j[name] = value;
  return j.dump(2);
}

}  // namespace vexrec
