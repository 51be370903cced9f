#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexrec/dataset.hpp"

namespace vexrec {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RecommendationList {
  std::size_t user = 0;
  std::vector<std::size_t> items;  // best first
  std::vector<double> scores;      // parallel to items, may be empty
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

double harmonic_f1(double p, double r);

enum class F1Mode {
  OfAverages,    // F1 of the user-averaged P and R
  AverageOfF1,   // mean of the per-user F1 values
};

// `truth[u]` holds user u's held-out items. Users with no held-out items are
// skipped; throws if none remain. P is hits / list length.
PRF precision_recall_f1(std::span<const RecommendationList> recs,
                        const std::vector<std::vector<std::size_t>>& truth,
                        F1Mode mode = F1Mode::OfAverages);
double hit_ratio(std::span<const RecommendationList> recs,
                 const std::vector<std::vector<std::size_t>>& truth);
// DCG over the first n ranks, normalised by the ideal DCG with
// min(n, |truth|) hits at the top.
double ndcg(std::span<const RecommendationList> recs,
            const std::vector<std::vector<std::size_t>>& truth, std::size_t n);

struct RougeScore {
  PRF prf;
  bool too_short = false;  // a sequence had fewer than n tokens; scored 0
};

// n-gram set overlap.
RougeScore rouge_n(std::span<const std::size_t> predicted, std::span<const std::size_t> reference,
                   std::size_t n);

// Fine cell of a g×g grid mapped onto a grid_side×grid_side grid.
std::size_t coarse_cell(std::size_t fine, std::size_t g, std::size_t grid_side);

// Top-k indices by descending weight, ties to the lower index.
std::vector<std::size_t> top_k_indices(std::span<const double> weights, std::size_t k);

struct RegionScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ndcg = 0.0;
};

// `weights` is an attention map over a g×g grid (h = g²). A selected fine cell
// counts as a hit when its coarse cell is labelled; recall is over all fine
// cells belonging to labelled coarse cells.
RegionScore region_explanation_score(std::span<const double> weights,
                                     const RegionLabelSet& labels, std::size_t k);

// Expected list metrics of a recommender ranking the candidate pool at
// random: P_u = |T_u| / |C_u|, R_u = min(n, |C_u|) / |C_u|.
PRF random_list_baseline(const std::vector<std::size_t>& test_sizes,
                         const std::vector<std::size_t>& candidate_sizes, std::size_t n);

// Named metric values, serialised as a flat JSON object.
using MetricReport = std::map<std::string, double>;
std::string metric_report_json(const MetricReport& report);

}  // namespace vexrec
