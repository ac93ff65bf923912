#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "febaa/evaluation.hpp"
#include "febaa/gcl.hpp"
#include "febaa/graph.hpp"

namespace febaa {

struct RankEntry {
  FeatureIndex feature = 0;
  double mean_score = 0.0;

  bool operator==(const RankEntry&) const = default;
};

/// R_f: every feature index ordered ascending by mean masked-accuracy score,
/// ties broken by ascending index. The constructor rejects anything else.
class FeatureRanking {
 public:
  FeatureRanking(std::vector<RankEntry> entries, std::size_t rounds,
                 std::size_t epochs_per_run);

  /// Sorts (feature j -> mean score) pairs into ranking order.
  static FeatureRanking from_scores(std::span<const double> mean_scores,
                                    std::size_t rounds, std::size_t epochs_per_run);

  std::span<const RankEntry> entries() const noexcept { return entries_; }
  std::span<const FeatureIndex> order() const noexcept { return order_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t rounds() const noexcept { return rounds_; }
  std::size_t epochs_per_run() const noexcept { return epochs_per_run_; }

  bool operator==(const FeatureRanking&) const = default;

 private:
  std::vector<RankEntry> entries_;
  std::vector<FeatureIndex> order_;
  std::size_t rounds_;
  std::size_t epochs_per_run_;
};

/// T_p = F * i * n, counted in training iterations.
struct RankingBudget {
  std::uint64_t total_iterations = 0;
  std::uint64_t num_features = 0;
  std::uint64_t epochs = 0;
  std::uint64_t rounds = 0;
};

RankingBudget pretraining_budget(std::uint64_t num_features, std::uint64_t epochs,
                                 std::uint64_t rounds);

/// Copy of `features` with column j zeroed.
Matrix mask_single_feature(const Matrix& features, std::size_t j);

/// Everything a scorer sees for one (round, feature) task. `round_seed` is
/// shared by every feature in a round (fixes the evaluation split);
/// `task_seed` is unique to the pair.
struct ScoreRequest {
  const AttributedGraph& graph;  // column `feature` already zeroed
  std::size_t feature;
  std::size_t round;
  std::size_t epochs;
  std::uint64_t round_seed;
  std::uint64_t task_seed;
};

/// Returns an accuracy in [0, 1]. May be invoked concurrently.
using Scorer = std::function<double(const ScoreRequest&)>;

struct RankOptions {
  std::size_t epochs = 150;  // i
  std::size_t rounds = 3;    // n
  std::uint64_t seed = 0;
  std::size_t threads = 0;   // 0: hardware concurrency
};

struct RankingRun {
  FeatureRanking ranking;
  std::uint64_t scorer_calls = 0;
};

RankingRun rank_features(const AttributedGraph& graph, const Scorer& scorer,
                         const RankOptions& options);

/// Trains the contrastive engine for `request.epochs` on two stochastic
/// all-feature views and returns linear-evaluation accuracy on one split
/// drawn from the round seed.
Scorer make_gcl_scorer(const TrainConfig& base, const EvalSettings& eval);

/// Analytic stub: t / (1 + t) where t is the summed column variance of the
/// masked matrix. Masking a high-variance column gives a low score.
Scorer make_variance_scorer();

Scorer make_scorer(std::string_view name, const TrainConfig& base, const EvalSettings& eval);

void save_ranking(const FeatureRanking& ranking, const std::filesystem::path& path);
FeatureRanking load_ranking(const std::filesystem::path& path);
std::string ranking_csv(const FeatureRanking& ranking);

}  // namespace febaa
