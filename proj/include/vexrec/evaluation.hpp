#pragma once

#include <cstddef>
#include <vector>

#include "vexrec/dataset.hpp"
#include "vexrec/metrics.hpp"
#include "vexrec/recommend.hpp"

namespace vexrec {

struct EvalOptions {
  std::size_t top_n = 5;
  std::vector<std::size_t> region_k{5, 10};
  F1Mode f1_mode = F1Mode::OfAverages;
  std::size_t max_review_length = 30;
};

struct EvalInputs {
  const SplitPlan* split = nullptr;                   // required
  const ReviewTable* reviews = nullptr;               // ROUGE over held-out pairs
  std::size_t end_token = 0;
  const std::vector<RegionLabelSet>* labels = nullptr;  // region metrics
};

struct EvalResult {
  MetricReport report;
  std::size_t rouge_pairs = 0;
  std::size_t rouge_too_short = 0;
  std::size_t region_pairs = 0;
  PRF random_baseline;  // analytic, for the list metrics
};

// Runs every metric the variant supports: list metrics always, ROUGE when the
// variant has a text model and reviews are given, region metrics when it has
// attention and labels are given. ROUGE and region scores are averaged over
// pairs.
EvalResult evaluate_model(const ScoringModel& model, const EvalInputs& inputs,
                          const EvalOptions& options);

}  // namespace vexrec
