#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vexrec/metrics.hpp"

using namespace vexrec;

namespace {

std::vector<RecommendationList> as_lists(const std::vector<std::vector<std::size_t>>& items) {
  std::vector<RecommendationList> out;
  for (std::size_t u = 0; u < items.size(); ++u) out.push_back({u, items[u], {}});
  return out;
}

}  // namespace

TEST_CASE("list metrics on a two-user example") {
  const std::vector<std::vector<std::size_t>> lists{{1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}};
  const std::vector<std::vector<std::size_t>> truth{{1, 3}, {11}};
  const auto recs = as_lists(lists);
  const PRF prf = precision_recall_f1(recs, truth);
  CHECK(prf.precision == doctest::Approx(0.2));
  CHECK(prf.recall == doctest::Approx(0.5));
  CHECK(prf.f1 == doctest::Approx(2.0 / 7.0));
  CHECK(precision_recall_f1(recs, truth, F1Mode::AverageOfF1).f1 ==
        doctest::Approx((2.0 * 0.4 / 1.4) / 2.0));
  CHECK(hit_ratio(recs, truth) == 0.5);
  const double user0 = (1.0 + 0.5) / (1.0 + 1.0 / std::log2(3.0));
  CHECK(ndcg(recs, truth, 5) == doctest::Approx(user0 / 2.0));
}

TEST_CASE("users without held-out items are skipped") {
  const auto recs = as_lists({{0, 1}, {2, 3}});
  const std::vector<std::vector<std::size_t>> truth{{}, {3}};
  CHECK(precision_recall_f1(recs, truth).precision == 0.5);
  CHECK(hit_ratio(recs, truth) == 1.0);
  CHECK_THROWS_AS(precision_recall_f1(recs, {{}, {}}), MetricError);
}

TEST_CASE("ndcg with a single relevant item at rank two") {
  const auto recs = as_lists({{4, 7, 9}});
  CHECK(ndcg(recs, {{7}}, 3) == doctest::Approx(1.0 / std::log2(3.0)));
}

TEST_CASE("rouge on short token sequences") {
  const std::vector<std::size_t> abc{0, 1, 2}, abd{0, 1, 3};
  const RougeScore r1 = rouge_n(abc, abd, 1);
  CHECK(r1.prf.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r1.prf.recall == doctest::Approx(2.0 / 3.0));
  const RougeScore r2 = rouge_n(abc, abd, 2);
  CHECK(r2.prf.f1 == doctest::Approx(0.5));
  const std::vector<std::size_t> one{0};
  const RougeScore short_pred = rouge_n(one, abd, 2);
  CHECK(short_pred.too_short);
  CHECK(short_pred.prf.f1 == 0.0);
  const std::vector<std::size_t> rep{0, 0, 0};
  CHECK(rouge_n(rep, abc, 1).prf.precision == 1.0);
}

TEST_CASE("coarse cells and top-k selection") {
  CHECK(coarse_cell(15, 4, 2) == 3);
  CHECK(coarse_cell(0, 4, 2) == 0);
  CHECK(coarse_cell(2, 4, 2) == 1);
  CHECK(coarse_cell(8, 4, 2) == 2);
  CHECK(coarse_cell(13, 14, 5) == 4);
  const std::vector<double> w{0.1, 0.3, 0.3, 0.2};
  CHECK(top_k_indices(w, 3) == std::vector<std::size_t>{1, 2, 3});
  CHECK(top_k_indices(w, 10).size() == 4);
}

TEST_CASE("region score against the brute-force oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t g = 2 + t % 6, side = 1 + t % g;
    std::vector<double> w(g * g);
    for (double& x : w) x = std::floor(u(rng) * 5.0);  // plenty of ties
    RegionLabelSet labels{0, 0, side, {}};
    for (std::size_t c = 0; c < side * side; ++c) {
      if (u(rng) < 0.4) labels.cells.push_back(c);
    }
    if (labels.cells.empty()) labels.cells.push_back(0);
    const std::size_t k = 1 + t % 7;
    const RegionScore s = region_explanation_score(w, labels, k);
    const oracle::Region o = oracle::region(w, g, side, labels.cells, k);
    CHECK(std::abs(s.precision - o.p) <= 1e-12);
    CHECK(std::abs(s.recall - o.r) <= 1e-12);
    CHECK(std::abs(s.f1 - o.f1) <= 1e-12);
    CHECK(std::abs(s.ndcg - o.ndcg) <= 1e-12);
  }
}

TEST_CASE("region score rejects malformed inputs") {
  const std::vector<double> w(16, 1.0 / 16);
  CHECK_THROWS_AS(region_explanation_score(std::vector<double>(15, 0.1), {0, 0, 2, {0}}, 3), MetricError);
  CHECK_THROWS_AS(region_explanation_score(w, {0, 0, 5, {0}}, 3), MetricError);
  CHECK_THROWS_AS(region_explanation_score(w, {0, 0, 2, {}}, 3), MetricError);
  CHECK_THROWS_AS(region_explanation_score(w, {0, 0, 2, {0}}, 0), MetricError);
}

TEST_CASE("random baseline is the analytic expectation") {
  const PRF b = random_list_baseline({2, 4}, {10, 20}, 5);
  CHECK(b.precision == doctest::Approx((0.2 + 0.2) / 2.0));
  CHECK(b.recall == doctest::Approx((0.5 + 0.25) / 2.0));
}

TEST_CASE("metric reports serialise as flat JSON") {
  const std::string json = metric_report_json({{"f1@5", 0.25}, {"hr@5", 1.0}});
  CHECK(json.find("\"f1@5\": 0.25") != std::string::npos);
  CHECK(json.find("\"hr@5\": 1.0") != std::string::npos);
}
