#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "febaa/graph.hpp"
#include "febaa/rng.hpp"

namespace febaa {

class FeatureRanking;

enum class SelectionMode { kRandom, kInfluential, kAllFeatures };

/// Which end of the ranking the candidate set is taken from. kLeast (L) is
/// the prefix of R_f: the lowest masked-accuracy scores, i.e. the features
/// whose removal hurts most. kMost (M) is the suffix.
enum class StartPosition { kLeast, kMost };

std::string_view to_string(SelectionMode mode);
std::string_view to_string(StartPosition pos);
std::optional<SelectionMode> parse_selection_mode(std::string_view text);
std::optional<StartPosition> parse_start_position(std::string_view text);

/// One of the two mutually exclusive selection masks (random or
/// influential). Never both: the mode tag records which one is active.
struct IndicatorVector {
  std::vector<std::uint8_t> bits;
  SelectionMode mode = SelectionMode::kRandom;

  std::size_t count() const;
  bool operator==(const IndicatorVector&) const = default;
};

/// Feature indices eligible for masking, sorted ascending.
struct CandidateFeatureSet {
  std::vector<FeatureIndex> indices;
  SelectionMode mode = SelectionMode::kAllFeatures;

  std::size_t size() const noexcept { return indices.size(); }
  bool contains(FeatureIndex j) const;
  bool operator==(const CandidateFeatureSet&) const = default;
};

struct ViewConfig {
  SelectionMode mode = SelectionMode::kAllFeatures;
  double masking_ratio = 1.0;        // share of W placed in CF
  double masking_probability = 0.0;  // per-epoch chance a CF column is zeroed
  std::optional<StartPosition> pos;  // required iff mode == kInfluential
  double edge_drop_probability = 0.0;
  std::uint64_t rng_seed = 0;        // drives candidate selection

  /// Throws Error(kInvalidArgument) naming the offending field.
  void validate() const;
  bool operator==(const ViewConfig&) const = default;
};

struct GraphView {
  Matrix features;
  std::vector<Edge> edges;
  std::vector<FeatureIndex> masked_columns;
  std::size_t dropped_edges = 0;

  bool operator==(const GraphView&) const = default;
};

struct MaskedFeatures {
  Matrix features;
  std::vector<FeatureIndex> masked_columns;
};

struct DroppedEdges {
  std::vector<Edge> edges;
  std::size_t dropped = 0;
};

/// round-half-up of ratio * num_features.
std::size_t candidate_count(std::size_t num_features, double ratio);

IndicatorVector select_random(std::size_t num_features, double ratio, Rng& rng);
IndicatorVector select_influential(const FeatureRanking& ranking, double ratio,
                                   std::optional<StartPosition> pos);
CandidateFeatureSet to_candidate_set(const IndicatorVector& indicator);

/// Runs once per training run, before the epoch loop.
CandidateFeatureSet candidate_features(std::size_t num_features, const ViewConfig& cfg,
                                       const FeatureRanking* ranking);
inline CandidateFeatureSet candidate_features(const AttributedGraph& graph,
                                              const ViewConfig& cfg,
                                              const FeatureRanking* ranking) {
  return candidate_features(graph.num_features(), cfg, ranking);
}

/// Zeros each candidate column independently with probability `probability`.
MaskedFeatures mask_features(const Matrix& features, const CandidateFeatureSet& cf,
                             double probability, Rng& rng);

/// Drops each unordered pair independently with probability `p_edge`. No
/// connectivity repair.
DroppedEdges drop_edges(std::span<const Edge> edges, double p_edge, Rng& rng);

/// mask_features followed by drop_edges, both drawing from `rng`.
GraphView apply_view(const AttributedGraph& graph, const CandidateFeatureSet& cf,
                     const ViewConfig& cfg, Rng& rng);

/// Per-epoch substream for view `view_id` (1 or 2).
inline Rng view_rng(std::uint64_t run_seed, int view_id, std::size_t epoch) {
  return Rng(derive_seed(run_seed, 0x7669657700ULL + static_cast<std::uint64_t>(view_id),
                         epoch));
}

}  // namespace febaa
