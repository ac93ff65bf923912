#include "febaa/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "febaa/error.hpp"
#include "febaa/ranking.hpp"

namespace febaa {

namespace {

void check_fraction(double value, const char* field) {
  if (!(value >= 0.0 && value <= 1.0))
    throw Error(ErrorCode::kInvalidArgument,
                std::string(field) + " must be in [0, 1], got " + format_double(value));
}

}  // namespace

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kRandom: return "random";
    case SelectionMode::kInfluential: return "influential";
    case SelectionMode::kAllFeatures: return "all_features";
  }
  return "unknown";
}

std::string_view to_string(StartPosition pos) {
  return pos == StartPosition::kLeast ? "L" : "M";
}

std::optional<SelectionMode> parse_selection_mode(std::string_view text) {
  if (text == "random") return SelectionMode::kRandom;
  if (text == "influential") return SelectionMode::kInfluential;
  if (text == "all_features") return SelectionMode::kAllFeatures;
  return std::nullopt;
}

std::optional<StartPosition> parse_start_position(std::string_view text) {
  if (text == "L" || text == "l") return StartPosition::kLeast;
  if (text == "M" || text == "m") return StartPosition::kMost;
  return std::nullopt;
}

std::size_t IndicatorVector::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

bool CandidateFeatureSet::contains(FeatureIndex j) const {
  return std::binary_search(indices.begin(), indices.end(), j);
}

void ViewConfig::validate() const {
  check_fraction(masking_ratio, "feature_masking_ratio");
  check_fraction(masking_probability, "feature_masking_probability");
  check_fraction(edge_drop_probability, "edge_drop_probability");
  if (mode == SelectionMode::kInfluential && !pos)
    throw Error(ErrorCode::kInvalidArgument,
                "starting_position is required when selection_mode is influential");
}

std::size_t candidate_count(std::size_t num_features, double ratio) {
  check_fraction(ratio, "feature_masking_ratio");
  // The slack absorbs representation error in decimal ratios such as 0.15
  // so that exact halves always round up.
  const double scaled = ratio * static_cast<double>(num_features);
  const auto k = static_cast<std::size_t>(std::floor(scaled + 0.5 + 1e-9));
  return std::min(k, num_features);
}

IndicatorVector select_random(std::size_t num_features, double ratio, Rng& rng) {
  const std::size_t k = candidate_count(num_features, ratio);
  std::vector<FeatureIndex> pool(num_features);
  std::iota(pool.begin(), pool.end(), FeatureIndex{0});
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(num_features - i));
    std::swap(pool[i], pool[j]);
  }
  IndicatorVector v{std::vector<std::uint8_t>(num_features, 0), SelectionMode::kRandom};
  for (std::size_t i = 0; i < k; ++i) v.bits[pool[i]] = 1;
  return v;
}

IndicatorVector select_influential(const FeatureRanking& ranking, double ratio,
                                   std::optional<StartPosition> pos) {
  if (!pos)
    throw Error(ErrorCode::kInvalidArgument,
                "starting_position is required for influential selection");
  const auto order = ranking.order();
  const std::size_t f = order.size();
  const std::size_t k = candidate_count(f, ratio);
  IndicatorVector v{std::vector<std::uint8_t>(f, 0), SelectionMode::kInfluential};
  const std::size_t begin = *pos == StartPosition::kLeast ? 0 : f - k;
  for (std::size_t i = begin; i < begin + k; ++i) v.bits[order[i]] = 1;
  return v;
}

CandidateFeatureSet to_candidate_set(const IndicatorVector& indicator) {
  CandidateFeatureSet cf;
  cf.mode = indicator.mode;
  for (std::size_t j = 0; j < indicator.bits.size(); ++j)
    if (indicator.bits[j]) cf.indices.push_back(static_cast<FeatureIndex>(j));
  return cf;
}

CandidateFeatureSet candidate_features(std::size_t num_features, const ViewConfig& cfg,
                                       const FeatureRanking* ranking) {
  cfg.validate();
  switch (cfg.mode) {
    case SelectionMode::kAllFeatures: {
      CandidateFeatureSet cf;
      cf.mode = SelectionMode::kAllFeatures;
      cf.indices.resize(num_features);
      std::iota(cf.indices.begin(), cf.indices.end(), FeatureIndex{0});
      return cf;
    }
    case SelectionMode::kRandom: {
      Rng rng(cfg.rng_seed);
      return to_candidate_set(select_random(num_features, cfg.masking_ratio, rng));
    }
    case SelectionMode::kInfluential: {
      if (!ranking)
        throw Error(ErrorCode::kInvalidArgument,
                    "ranking required for influential candidate selection");
      if (ranking->size() != num_features)
        throw Error(ErrorCode::kInvalidArgument,
                    "ranking covers " + std::to_string(ranking->size()) +
                        " features but the graph has " + std::to_string(num_features));
      return to_candidate_set(select_influential(*ranking, cfg.masking_ratio, cfg.pos));
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown selection mode");
}

MaskedFeatures mask_features(const Matrix& features, const CandidateFeatureSet& cf,
                             double probability, Rng& rng) {
  check_fraction(probability, "feature_masking_probability");
  MaskedFeatures out{features, {}};
  for (FeatureIndex j : cf.indices) {
    if (j >= features.cols())
      throw Error(ErrorCode::kInvalidArgument, "candidate feature index out of range");
    if (rng.bernoulli(probability)) out.masked_columns.push_back(j);
  }
  for (std::size_t i = 0; i < out.features.rows(); ++i) {
    auto row = out.features.row(i);
    for (FeatureIndex j : out.masked_columns) row[j] = 0.0;
  }
  return out;
}

DroppedEdges drop_edges(std::span<const Edge> edges, double p_edge, Rng& rng) {
  check_fraction(p_edge, "edge_drop_probability");
  DroppedEdges out;
  out.edges.reserve(edges.size());
  for (const Edge& e : edges) {
    if (rng.bernoulli(p_edge))
      ++out.dropped;
    else
      out.edges.push_back(e);
  }
  return out;
}

GraphView apply_view(const AttributedGraph& graph, const CandidateFeatureSet& cf,
                     const ViewConfig& cfg, Rng& rng) {
  auto masked = mask_features(graph.features(), cf, cfg.masking_probability, rng);
  auto kept = drop_edges(graph.edges(), cfg.edge_drop_probability, rng);
  return GraphView{std::move(masked.features), std::move(kept.edges),
                   std::move(masked.masked_columns), kept.dropped};
}

}  // namespace febaa
