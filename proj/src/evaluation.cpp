#include "vexrec/evaluation.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "vexrec/text_gru.hpp"
#include "vexrec/vecf.hpp"

namespace vexrec {

namespace {

struct RougePair {
  RougeScore r1, r2;
};

}  // namespace

EvalResult evaluate_model(const ScoringModel& model, const EvalInputs& in,
                          const EvalOptions& options) {
  if (in.split == nullptr) throw std::invalid_argument("evaluation needs a split");
  const SplitPlan& split = *in.split;
  const ModelParams& params = *model.params;
  const std::size_t n = options.top_n;
  const std::string suffix = "@" + std::to_string(n);
  EvalResult result;

  std::vector<std::size_t> users(split.train.size());
  std::iota(users.begin(), users.end(), std::size_t{0});
  const auto recs = recommend_parallel(model, users, split.train, n);
  result.report["f1" + suffix] = precision_recall_f1(recs, split.test, options.f1_mode).f1;
  result.report["hr" + suffix] = hit_ratio(recs, split.test);
  result.report["ndcg" + suffix] = ndcg(recs, split.test, n);

  std::vector<std::size_t> test_sizes, candidates;
  for (std::size_t u = 0; u < users.size(); ++u) {
    test_sizes.push_back(split.test[u].size());
    candidates.push_back(params.dims.items - split.train[u].size());
  }
  result.random_baseline = random_list_baseline(test_sizes, candidates, n);

  if (uses_text(model.variant) && in.reviews != nullptr) {
    std::vector<const Review*> held_out;
    for (std::size_t u = 0; u < users.size(); ++u) {
      for (std::size_t i : split.test[u]) {
        if (const Review* r = in.reviews->find(u, i)) held_out.push_back(r);
      }
    }
    std::vector<RougePair> scores(held_out.size());
    const auto count = static_cast<long long>(held_out.size());
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < count; ++k) {
      const Review& r = *held_out[static_cast<std::size_t>(k)];
      const PairForward fwd = forward_pair(params, model.variant, model.features, r.user, r.item);
      const TextInputs text{params.user_embedding.row(r.user), params.item_embedding.row(r.item),
                            fwd.image.span()};
      const auto decoded = greedy_decode(params, text, in.end_token, options.max_review_length);
      scores[static_cast<std::size_t>(k)] = {rouge_n(decoded, r.tokens, 1),
                                             rouge_n(decoded, r.tokens, 2)};
    }
    if (!scores.empty()) {
      PRF r1, r2;
      for (const auto& s : scores) {
        r1.precision += s.r1.prf.precision;
        r1.recall += s.r1.prf.recall;
        r1.f1 += s.r1.prf.f1;
        r2.precision += s.r2.prf.precision;
        r2.recall += s.r2.prf.recall;
        r2.f1 += s.r2.prf.f1;
        result.rouge_too_short += s.r1.too_short || s.r2.too_short;
      }
      const double m = static_cast<double>(scores.size());
      result.report["rouge1_p"] = r1.precision / m;
      result.report["rouge1_r"] = r1.recall / m;
      result.report["rouge1_f1"] = r1.f1 / m;
      result.report["rouge2_p"] = r2.precision / m;
      result.report["rouge2_r"] = r2.recall / m;
      result.report["rouge2_f1"] = r2.f1 / m;
      result.rouge_pairs = scores.size();
    }
  }

  if (uses_image(model.variant) && in.labels != nullptr && !in.labels->empty()) {
    std::vector<UserItem> pairs;
    for (const auto& l : *in.labels) pairs.push_back({l.user, l.item});
    const auto maps = attention_maps_parallel(model, pairs);
    for (std::size_t k : options.region_k) {
      double f1 = 0.0, nd = 0.0;
      for (std::size_t p = 0; p < maps.size(); ++p) {
        const RegionScore s = region_explanation_score(maps[p].weights.span(), (*in.labels)[p], k);
        f1 += s.f1;
        nd += s.ndcg;
      }
      const double m = static_cast<double>(maps.size());
      result.report["region_f1@" + std::to_string(k)] = f1 / m;
      result.report["region_ndcg@" + std::to_string(k)] = nd / m;
    }
    result.region_pairs = maps.size();
  }
  return result;
}

}  // namespace vexrec
