#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "febaa/matrix.hpp"

namespace febaa {

using NodeId = std::uint32_t;
using FeatureIndex = std::uint32_t;
using Label = std::uint32_t;

/// Unordered node pair stored canonically as (min, max). u == v is a
/// self-loop carried over from the input.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge make(NodeId a, NodeId b) noexcept {
    return a <= b ? Edge{a, b} : Edge{b, a};
  }
  bool is_self_loop() const noexcept { return u == v; }

  auto operator<=>(const Edge&) const = default;
};

/// Collapses directed pairs into a sorted, duplicate-free list of unordered
/// pairs.
std::vector<Edge> symmetrize_edges(std::span<const std::pair<NodeId, NodeId>> directed);

/// Node feature matrix X (N x F), undirected edge set and optional labels.
/// Immutable once constructed; the constructor enforces every structural
/// invariant.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  /// `edges` must already be canonical (sorted, unique, u <= v).
  AttributedGraph(Matrix features, std::vector<Edge> edges,
                  std::optional<std::vector<Label>> labels = std::nullopt);

  static AttributedGraph from_directed(
      Matrix features, std::span<const std::pair<NodeId, NodeId>> directed,
      std::optional<std::vector<Label>> labels = std::nullopt);

  std::size_t num_nodes() const noexcept { return features_.rows(); }
  std::size_t num_features() const noexcept { return features_.cols(); }
  const Matrix& features() const noexcept { return features_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const std::optional<std::vector<Label>>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> num_classes() const noexcept { return num_classes_; }

  /// Same structure and labels, different feature matrix of identical shape.
  AttributedGraph with_features(Matrix features) const;
  /// Same features and labels, a subset of the edge list.
  AttributedGraph with_edges(std::vector<Edge> edges) const;

  bool operator==(const AttributedGraph&) const = default;

 private:
  Matrix features_;
  std::vector<Edge> edges_;
  std::optional<std::vector<Label>> labels_;
  std::optional<std::size_t> num_classes_;
};

struct GraphStats {
  std::size_t num_nodes = 0;
  std::size_t num_features = 0;
  std::size_t num_edges = 0;  // unordered pairs
  std::size_t num_self_loops = 0;
  std::optional<std::size_t> num_classes;
  std::vector<std::size_t> class_histogram;

  bool operator==(const GraphStats&) const = default;
};

/// Loads a whitespace-separated 0-based edge list, a CSV feature matrix and
/// an optional one-label-per-line file. N is the number of feature rows.
AttributedGraph load_graph(const std::filesystem::path& edges_path,
                           const std::filesystem::path& features_path,
                           const std::optional<std::filesystem::path>& labels_path = std::nullopt);

/// Idempotent: storage is already undirected, so this re-canonicalises and
/// returns an equal graph.
AttributedGraph symmetrize(const AttributedGraph& graph);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I. Input self-loops
/// do not add to the unit diagonal.
CsrMatrix normalized_adjacency(std::size_t num_nodes, std::span<const Edge> edges);
inline CsrMatrix normalized_adjacency(const AttributedGraph& graph) {
  return normalized_adjacency(graph.num_nodes(), graph.edges());
}

GraphStats stats(const AttributedGraph& graph);

/// JSON validation report emitted by `ingest`.
std::string ingest_report_json(const AttributedGraph& graph);

void write_features_csv(const Matrix& features, const std::filesystem::path& path);
void write_edges(std::span<const Edge> edges, const std::filesystem::path& path);
void write_labels(std::span<const Label> labels, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);
std::vector<Label> read_labels(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace febaa
