#include "febaa/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "febaa/error.hpp"
#include "febaa/parallel.hpp"
#include "febaa/rng.hpp"

namespace febaa {

namespace {

constexpr std::string_view kRankingHeader = "rank,feature_index,mean_score";

bool ranks_before(const RankEntry& a, const RankEntry& b) {
  if (a.mean_score != b.mean_score) return a.mean_score < b.mean_score;
  return a.feature < b.feature;
}

}  // namespace

FeatureRanking::FeatureRanking(std::vector<RankEntry> entries, std::size_t rounds,
                               std::size_t epochs_per_run)
    : entries_(std::move(entries)), rounds_(rounds), epochs_per_run_(epochs_per_run) {
  const std::size_t f = entries_.size();
  std::vector<bool> seen(f, false);
  for (std::size_t r = 0; r < f; ++r) {
    const RankEntry& e = entries_[r];
    if (e.feature >= f)
      throw Error(ErrorCode::kRanking, "ranking: feature index " + std::to_string(e.feature) +
                                           " out of range for " + std::to_string(f) +
                                           " features");
    if (seen[e.feature])
      throw Error(ErrorCode::kRanking,
                  "ranking: duplicate feature index " + std::to_string(e.feature));
    seen[e.feature] = true;
    if (!std::isfinite(e.mean_score))
      throw Error(ErrorCode::kRanking, "ranking: non-finite score at rank " + std::to_string(r));
    if (r > 0 && !ranks_before(entries_[r - 1], e))
      throw Error(ErrorCode::kRanking,
                  "ranking: scores not ascending (ties by index) at rank " + std::to_string(r));
  }
  order_.reserve(f);
  for (const RankEntry& e : entries_) order_.push_back(e.feature);
}

FeatureRanking FeatureRanking::from_scores(std::span<const double> mean_scores,
                                           std::size_t rounds, std::size_t epochs_per_run) {
  std::vector<RankEntry> entries;
  entries.reserve(mean_scores.size());
  for (std::size_t j = 0; j < mean_scores.size(); ++j)
    entries.push_back(RankEntry{static_cast<FeatureIndex>(j), mean_scores[j]});
  std::sort(entries.begin(), entries.end(), ranks_before);
  return FeatureRanking(std::move(entries), rounds, epochs_per_run);
}

RankingBudget pretraining_budget(std::uint64_t num_features, std::uint64_t epochs,
                                 std::uint64_t rounds) {
  if (num_features == 0 || epochs == 0 || rounds == 0)
    throw Error(ErrorCode::kInvalidArgument, "pretraining_budget: all factors must be positive");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (num_features > kMax / epochs || num_features * epochs > kMax / rounds)
    throw Error(ErrorCode::kInvalidArgument, "pretraining_budget: overflow");
  return RankingBudget{num_features * epochs * rounds, num_features, epochs, rounds};
}

Matrix mask_single_feature(const Matrix& features, std::size_t j) {
  if (j >= features.cols())
    throw Error(ErrorCode::kInvalidArgument,
                "mask_single_feature: index " + std::to_string(j) + " out of range for " +
                    std::to_string(features.cols()) + " features");
  Matrix out = features;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) = 0.0;
  return out;
}

RankingRun rank_features(const AttributedGraph& graph, const Scorer& scorer,
                         const RankOptions& options) {
  if (options.rounds < 1) throw Error(ErrorCode::kInvalidArgument, "rank: rounds must be >= 1");
  if (options.epochs < 1) throw Error(ErrorCode::kInvalidArgument, "rank: epochs must be >= 1");
  const std::size_t f = graph.num_features();
  const std::size_t tasks = f * options.rounds;

  std::vector<double> scores(tasks, 0.0);
  std::vector<std::optional<std::string>> failures(tasks);
  std::atomic<std::uint64_t> calls{0};

  parallel_for(tasks, options.threads, [&](std::size_t t) {
    const std::size_t round = t / f;
    const std::size_t feature = t % f;
    try {
      const AttributedGraph masked =
          graph.with_features(mask_single_feature(graph.features(), feature));
      const ScoreRequest request{masked,
                                 feature,
                                 round,
                                 options.epochs,
                                 derive_seed(options.seed, round),
                                 derive_seed(options.seed, round, feature)};
      ++calls;
      const double s = scorer(request);
      if (!(s >= 0.0 && s <= 1.0))
        throw Error(ErrorCode::kRanking, "score " + format_double(s) + " outside [0, 1]");
      scores[t] = s;
    } catch (const std::exception& e) {
      failures[t] = e.what();
    }
  });

  for (std::size_t t = 0; t < tasks; ++t) {
    if (failures[t]) {
      throw Error(ErrorCode::kRanking, "scorer failed for round " + std::to_string(t / f + 1) +
                                           ", feature " + std::to_string(t % f) + ": " +
                                           *failures[t]);
    }
  }

  std::vector<double> mean(f, 0.0);
  for (std::size_t j = 0; j < f; ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < options.rounds; ++r) sum += scores[r * f + j];
    mean[j] = sum / static_cast<double>(options.rounds);
  }
  return RankingRun{FeatureRanking::from_scores(mean, options.rounds, options.epochs),
                    calls.load()};
}

Scorer make_gcl_scorer(const TrainConfig& base, const EvalSettings& eval) {
  return [base, eval](const ScoreRequest& request) {
    const auto& labels = request.graph.labels();
    if (!labels) throw Error(ErrorCode::kRanking, "gcl scorer requires node labels");
    TrainConfig cfg = base;
    cfg.epochs = request.epochs;
    cfg.seed = request.task_seed;
    // Ranking precedes candidate selection: both views mask stochastically
    // over the whole feature set.
    cfg.view1.mode = SelectionMode::kAllFeatures;
    cfg.view2.mode = SelectionMode::kAllFeatures;
    const TrainResult trained = train(request.graph, nullptr, cfg);
    const SplitSet split =
        generate_splits(request.graph.num_nodes(), eval.train_fraction, 1, request.round_seed);
    const EvalResult r =
        linear_evaluate(trained.embedding, *labels, split, eval.l2, eval.iterations);
    return r.mean_f1 / 100.0;
  };
}

Scorer make_variance_scorer() {
  return [](const ScoreRequest& request) {
    const Matrix& x = request.graph.features();
    const auto n = static_cast<double>(x.rows());
    double total = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
      mean /= n;
      double var = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
      total += var / n;
    }
    return total / (1.0 + total);
  };
}

Scorer make_scorer(std::string_view name, const TrainConfig& base, const EvalSettings& eval) {
  if (name == "gcl") return make_gcl_scorer(base, eval);
  if (name == "variance-stub") return make_variance_scorer();
  throw Error(ErrorCode::kInvalidArgument,
              "unknown scorer '" + std::string(name) + "' (expected gcl or variance-stub)");
}

std::string ranking_csv(const FeatureRanking& ranking) {
  std::string out(kRankingHeader);
  out += '\n';
  const auto entries = ranking.entries();
  for (std::size_t r = 0; r < entries.size(); ++r) {
    out += std::to_string(r) + ',' + std::to_string(entries[r].feature) + ',' +
           format_double(entries[r].mean_score) + '\n';
  }
  return out;
}

void save_ranking(const FeatureRanking& ranking, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << ranking_csv(ranking);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

FeatureRanking load_ranking(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty ranking file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRankingHeader)
    throw ParseError(path.string(), 1, "expected header '" + std::string(kRankingHeader) + "'");

  std::vector<RankEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string rank_text, feature_text, score_text, extra;
    if (!std::getline(row, rank_text, ',') || !std::getline(row, feature_text, ',') ||
        !std::getline(row, score_text, ',') || std::getline(row, extra, ','))
      throw ParseError(path.string(), line_no, "expected rank,feature_index,mean_score");
    try {
      std::size_t used = 0;
      const unsigned long rank = std::stoul(rank_text, &used);
      if (used != rank_text.size() || rank != entries.size())
        throw ParseError(path.string(), line_no,
                         "rank column must count up from 0, found '" + rank_text + "'");
      const unsigned long feature = std::stoul(feature_text, &used);
      if (used != feature_text.size() || feature > std::numeric_limits<FeatureIndex>::max())
        throw ParseError(path.string(), line_no, "malformed feature index");
      const double score = std::stod(score_text, &used);
      if (used != score_text.size())
        throw ParseError(path.string(), line_no, "malformed score");
      entries.push_back(RankEntry{static_cast<FeatureIndex>(feature), score});
    } catch (const std::logic_error&) {
      throw ParseError(path.string(), line_no, "malformed number");
    }
  }
  try {
    return FeatureRanking(std::move(entries), 0, 0);
  } catch (const Error& e) {
    throw Error(ErrorCode::kRanking, path.string() + ": " + e.what());
  }
}

}  // namespace febaa
