#include "febaa/synthetic.hpp"

#include <numeric>

#include "febaa/error.hpp"
#include "febaa/rng.hpp"

namespace febaa {

namespace {

std::vector<Edge> sample_block_edges(std::span<const Label> block, double p_in,
                                     double p_out, Rng& rng) {
  std::vector<Edge> edges;
  const std::size_t n = block.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = block[i] == block[j] ? p_in : p_out;
      if (rng.bernoulli(p))
        edges.push_back(Edge{static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  }
  return edges;
}

}  // namespace

AttributedGraph make_sbm(const SbmSpec& spec) {
  if (spec.block_sizes.empty())
    throw Error(ErrorCode::kInvalidArgument, "sbm: at least one block required");
  if (spec.informative_features > spec.num_features)
    throw Error(ErrorCode::kInvalidArgument, "sbm: informative_features > num_features");

  std::vector<Label> labels;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b)
    labels.insert(labels.end(), spec.block_sizes[b], static_cast<Label>(b));

  Rng rng(derive_seed(spec.seed, 0x5b3));
  auto edges = sample_block_edges(labels, spec.p_in, spec.p_out, rng);

  const std::size_t n = labels.size();
  const std::size_t blocks = spec.block_sizes.size();
  Matrix x(n, spec.num_features);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < spec.num_features; ++j) {
      double mean = 0.0;
      // Block b is shifted by +signal on the informative dimensions j with
      // j % blocks == b, so every class has its own direction.
      if (j < spec.informative_features && j % blocks == labels[i]) mean = spec.signal;
      x(i, j) = mean + spec.noise * rng.normal();
    }
  }
  return AttributedGraph(std::move(x), std::move(edges), std::move(labels));
}

AttributedGraph make_planted_signal(const PlantedSignalSpec& spec) {
  if (spec.num_features == 0)
    throw Error(ErrorCode::kInvalidArgument, "planted signal: need at least one feature");
  std::vector<Label> labels(spec.num_nodes);
  for (std::size_t i = 0; i < spec.num_nodes; ++i) labels[i] = static_cast<Label>(i % 2);

  Rng rng(derive_seed(spec.seed, 0x91a));
  rng.shuffle(std::span<Label>(labels));
  auto edges = sample_block_edges(labels, spec.p_in, spec.p_out, rng);

  Matrix x(spec.num_nodes, spec.num_features);
  for (std::size_t i = 0; i < spec.num_nodes; ++i) {
    x(i, 0) = static_cast<double>(labels[i]) + spec.label_noise * rng.normal();
    for (std::size_t j = 1; j < spec.num_features; ++j) x(i, j) = rng.normal();
  }
  return AttributedGraph(std::move(x), std::move(edges), std::move(labels));
}

}  // namespace febaa
