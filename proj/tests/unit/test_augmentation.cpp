#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "febaa/augmentation.hpp"
#include "febaa/error.hpp"
#include "febaa/ranking.hpp"
#include "febaa/synthetic.hpp"
#include "oracles.hpp"

using namespace febaa;

namespace {

FeatureRanking ranking_from_order(const std::vector<FeatureIndex>& order) {
  std::vector<RankEntry> entries;
  for (std::size_t r = 0; r < order.size(); ++r)
    entries.push_back({order[r], 0.1 * static_cast<double>(r)});
  return FeatureRanking(std::move(entries), 1, 1);
}

std::vector<FeatureIndex> set_bits(const IndicatorVector& v) {
  return to_candidate_set(v).indices;
}

}  // namespace

TEST_CASE("random selection with ratio 0.6 of 10 features sets exactly 6 bits") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const IndicatorVector v = select_random(10, 0.6, rng);
    CHECK(v.bits.size() == 10);
    CHECK(v.count() == 6);
    CHECK(v.mode == SelectionMode::kRandom);
  }
}

TEST_CASE("random selection edge ratios") {
  Rng rng(1);
  CHECK(select_random(10, 0.0, rng).count() == 0);
  const IndicatorVector all = select_random(5, 1.0, rng);
  CHECK(all.bits == std::vector<std::uint8_t>(5, 1));
}

TEST_CASE("random selection draws different subsets across seeds") {
  std::set<std::vector<FeatureIndex>> seen;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    seen.insert(set_bits(select_random(10, 0.5, rng)));
  }
  CHECK(seen.size() > 20);
}

TEST_CASE("influential selection with pos=L takes the lowest scores") {
  const FeatureRanking r = ranking_from_order({9, 4, 0, 7, 2, 5, 1, 8, 3, 6});
  const IndicatorVector v = select_influential(r, 0.6, StartPosition::kLeast);
  CHECK(v.mode == SelectionMode::kInfluential);
  CHECK(set_bits(v) == std::vector<FeatureIndex>{0, 2, 4, 5, 7, 9});
}

TEST_CASE("influential selection with pos=M takes the suffix") {
  const FeatureRanking r = ranking_from_order({3, 1, 0, 2});
  CHECK(set_bits(select_influential(r, 0.5, StartPosition::kMost)) ==
        std::vector<FeatureIndex>{0, 2});
  CHECK(set_bits(select_influential(r, 0.5, StartPosition::kLeast)) ==
        std::vector<FeatureIndex>{1, 3});
}

TEST_CASE("influential selection with ratio 1 covers every feature at either end") {
  const FeatureRanking r = ranking_from_order({3, 1, 0, 2});
  for (StartPosition pos : {StartPosition::kLeast, StartPosition::kMost})
    CHECK(select_influential(r, 1.0, pos).count() == 4);
}

TEST_CASE("influential selection without pos is rejected") {
  const FeatureRanking r = ranking_from_order({0, 1});
  CHECK_THROWS_AS(select_influential(r, 0.5, std::nullopt), Error);
}

TEST_CASE("candidate count is round-half-up of ratio times F") {
  // Integer oracle on the 1% grid: round(k * F / 100) with halves going up.
  for (std::size_t f = 1; f <= 10000; ++f) {
    for (std::size_t k = 0; k <= 100; ++k) {
      const std::size_t expect = (k * f + 50) / 100;
      const std::size_t got = candidate_count(f, static_cast<double>(k) / 100.0);
      if (got != expect) {
        FAIL_CHECK("F=" << f << " ratio=" << k << "%: " << got << " != " << expect);
        return;
      }
    }
  }
  CHECK(candidate_count(1433, 0.375) == 537);
}

TEST_CASE("candidate features: |CF| for random, influential and all-features modes") {
  ViewConfig cfg;
  cfg.mode = SelectionMode::kRandom;
  cfg.masking_ratio = 0.6;
  cfg.rng_seed = 4;
  const CandidateFeatureSet random_cf = candidate_features(10, cfg, nullptr);
  CHECK(random_cf.size() == 6);
  CHECK(random_cf.mode == SelectionMode::kRandom);

  std::vector<FeatureIndex> order(1433);
  std::iota(order.begin(), order.end(), FeatureIndex{0});
  const FeatureRanking cora = ranking_from_order(order);
  cfg.mode = SelectionMode::kInfluential;
  cfg.masking_ratio = 0.375;
  cfg.pos = StartPosition::kLeast;
  const CandidateFeatureSet infl = candidate_features(1433, cfg, &cora);
  CHECK(infl.size() == 537);
  CHECK(infl.mode == SelectionMode::kInfluential);

  cfg.mode = SelectionMode::kAllFeatures;
  const CandidateFeatureSet all = candidate_features(7, cfg, nullptr);
  CHECK(all.indices == std::vector<FeatureIndex>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("influential candidate selection needs a matching ranking") {
  ViewConfig cfg;
  cfg.mode = SelectionMode::kInfluential;
  cfg.masking_ratio = 0.5;
  cfg.pos = StartPosition::kMost;
  CHECK_THROWS_WITH_AS(candidate_features(4, cfg, nullptr), doctest::Contains("ranking required"),
                       Error);
  const FeatureRanking r = ranking_from_order({0, 1, 2});
  CHECK_THROWS_AS(candidate_features(4, cfg, &r), Error);
}

TEST_CASE("candidate selection mode matches the configured mode") {
  const FeatureRanking r = ranking_from_order({2, 0, 3, 1});
  for (SelectionMode mode :
       {SelectionMode::kRandom, SelectionMode::kInfluential, SelectionMode::kAllFeatures}) {
    ViewConfig cfg;
    cfg.mode = mode;
    cfg.masking_ratio = 0.5;
    cfg.pos = StartPosition::kLeast;
    CHECK(candidate_features(4, cfg, &r).mode == mode);
  }
}

TEST_CASE("masking with probability 0 is the identity and 1 zeroes all of CF") {
  std::mt19937_64 gen(2);
  const Matrix x = oracle::random_matrix(6, 5, gen, 0.5, 1.5);
  const CandidateFeatureSet cf{{1, 3}, SelectionMode::kRandom};
  Rng rng(0);
  const MaskedFeatures none = mask_features(x, cf, 0.0, rng);
  CHECK(none.features == x);
  CHECK(none.masked_columns.empty());

  const MaskedFeatures all = mask_features(x, cf, 1.0, rng);
  CHECK(all.masked_columns == std::vector<FeatureIndex>{1, 3});
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (j == 1 || j == 3)
        CHECK(all.features(i, j) == 0.0);
      else
        CHECK(all.features(i, j) == x(i, j));
    }
  }
}

TEST_CASE("masked column count follows Binomial(100, 0.3)") {
  const Matrix x(2, 100, 1.0);
  CandidateFeatureSet cf;
  for (FeatureIndex j = 0; j < 100; ++j) cf.indices.push_back(j);
  Rng rng(77);
  const int trials = 10000;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) total += mask_features(x, cf, 0.3, rng).masked_columns.size();
  const double mean = total / trials;
  const double sigma_of_mean = std::sqrt(100 * 0.3 * 0.7 / trials);
  CHECK(std::abs(mean - 30.0) <= 3.0 * sigma_of_mean);
}

TEST_CASE("edge dropping with p=0 keeps everything and p=1 drops everything") {
  std::mt19937_64 gen(5);
  const auto edges = oracle::random_edges(20, 0.3, gen);
  Rng rng(1);
  const DroppedEdges keep = drop_edges(edges, 0.0, rng);
  CHECK(keep.edges == edges);
  CHECK(keep.dropped == 0);
  const DroppedEdges none = drop_edges(edges, 1.0, rng);
  CHECK(none.edges.empty());
  CHECK(none.dropped == edges.size());
}

TEST_CASE("retained edges follow Binomial(5278, 0.8)") {
  std::vector<Edge> edges;
  for (NodeId u = 0; edges.size() < 5278; ++u) edges.push_back({u, u + 1});
  Rng rng(123);
  const int trials = 10000;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) total += drop_edges(edges, 0.2, rng).edges.size();
  const double mean = total / trials;
  const double sigma_of_mean = std::sqrt(5278 * 0.8 * 0.2 / trials);
  CHECK(std::abs(mean - 4222.4) <= 3.0 * sigma_of_mean);
}

TEST_CASE("view with no masking and no dropping equals the input") {
  SbmSpec spec;
  spec.seed = 1;
  const AttributedGraph g = make_sbm(spec);
  ViewConfig cfg;
  const CandidateFeatureSet cf = candidate_features(g, cfg, nullptr);
  Rng rng(3);
  const GraphView v = apply_view(g, cf, cfg, rng);
  CHECK(v.features == g.features());
  CHECK(std::equal(v.edges.begin(), v.edges.end(), g.edges().begin(), g.edges().end()));
  CHECK(v.masked_columns.empty());
}

TEST_CASE("feature masking alone leaves the edge set unchanged") {
  SbmSpec spec;
  spec.seed = 2;
  const AttributedGraph g = make_sbm(spec);
  ViewConfig cfg;
  cfg.masking_probability = 0.5;
  const CandidateFeatureSet cf = candidate_features(g, cfg, nullptr);
  Rng rng(4);
  const GraphView v = apply_view(g, cf, cfg, rng);
  CHECK(v.edges.size() == g.edges().size());
  CHECK(!v.masked_columns.empty());
}

TEST_CASE("the same seed reproduces a view bit for bit") {
  SbmSpec spec;
  spec.seed = 3;
  const AttributedGraph g = make_sbm(spec);
  ViewConfig cfg;
  cfg.mode = SelectionMode::kRandom;
  cfg.masking_ratio = 0.5;
  cfg.masking_probability = 0.4;
  cfg.edge_drop_probability = 0.3;
  cfg.rng_seed = 99;
  const CandidateFeatureSet cf = candidate_features(g, cfg, nullptr);
  Rng a = view_rng(5, 1, 17);
  Rng b = view_rng(5, 1, 17);
  CHECK(apply_view(g, cf, cfg, a) == apply_view(g, cf, cfg, b));
  Rng c = view_rng(5, 2, 17);
  Rng d = view_rng(5, 1, 17);
  CHECK(!(apply_view(g, cf, cfg, c) == apply_view(g, cf, cfg, d)));
}

TEST_CASE("view config validation names the offending field") {
  ViewConfig cfg;
  cfg.masking_ratio = 1.3;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("feature_masking_ratio"), Error);
  cfg = ViewConfig{};
  cfg.edge_drop_probability = -0.1;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("edge_drop_probability"), Error);
  cfg = ViewConfig{};
  cfg.mode = SelectionMode::kInfluential;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("mode and position names parse back") {
  for (SelectionMode m :
       {SelectionMode::kRandom, SelectionMode::kInfluential, SelectionMode::kAllFeatures})
    CHECK(parse_selection_mode(to_string(m)) == m);
  CHECK(parse_start_position("L") == StartPosition::kLeast);
  CHECK(parse_start_position("M") == StartPosition::kMost);
  CHECK(!parse_start_position("X"));
  CHECK(!parse_selection_mode("both"));
}
