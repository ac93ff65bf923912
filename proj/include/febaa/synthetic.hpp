#pragma once

#include <cstdint>
#include <vector>

#include "febaa/graph.hpp"

namespace febaa {

/// Stochastic block model with Gaussian node features whose class means
/// differ on the first `informative_features` dimensions.
struct SbmSpec {
  std::vector<std::size_t> block_sizes{50, 50};
  double p_in = 0.1;
  double p_out = 0.01;
  std::size_t num_features = 16;
  std::size_t informative_features = 4;
  double signal = 1.0;  // class-mean offset on informative dimensions
  double noise = 1.0;   // per-entry Gaussian standard deviation
  std::uint64_t seed = 0;
};

AttributedGraph make_sbm(const SbmSpec& spec);

/// Planted-signal fixture: two balanced classes, feature 0 is the class
/// indicator plus Gaussian noise, every other feature is pure noise.
struct PlantedSignalSpec {
  std::size_t num_nodes = 300;
  std::size_t num_features = 20;
  double label_noise = 0.1;  // std of the noise added to feature 0
  double p_in = 0.03;
  double p_out = 0.003;
  std::uint64_t seed = 0;
};

AttributedGraph make_planted_signal(const PlantedSignalSpec& spec);

}  // namespace febaa
