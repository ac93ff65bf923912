#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "febaa/augmentation.hpp"
#include "febaa/graph.hpp"
#include "febaa/matrix.hpp"

namespace febaa {

class FeatureRanking;

/// Two-layer graph-convolution encoder: H = A relu(A X W1) W2.
struct EncoderParams {
  Matrix w1;  // F x hidden
  Matrix w2;  // hidden x out

  bool operator==(const EncoderParams&) const = default;
};

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  double weight_decay = 1e-5;
  std::size_t hidden_size = 32;
  std::size_t output_size = 16;
  double temperature = 0.5;
  ViewConfig view1;
  ViewConfig view2;
  std::uint64_t seed = 0;

  /// Accepts epochs == 0 (no gradient steps); configs loaded from file are
  /// held to epochs >= 1 by the config layer.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Glorot-uniform initialisation from `seed`.
EncoderParams init_params(std::size_t num_features, std::size_t hidden_size,
                          std::size_t output_size, std::uint64_t seed);

/// Intermediate products of one encoder pass, kept for backpropagation.
struct EncoderTrace {
  Matrix ax;   // A X
  Matrix z1;   // A X W1
  Matrix a1;   // relu(z1)
  Matrix aa1;  // A a1
  Matrix h;    // A a1 W2
};

Matrix encode(const EncoderParams& params, const CsrMatrix& adj, const Matrix& features);
EncoderTrace encode_trace(const EncoderParams& params, const CsrMatrix& adj,
                          const Matrix& features);

/// Mean over nodes and both anchor directions of
///   -log( e^{s(a_i, b_i)} / (sum_k e^{s(a_i, b_k)} + sum_{k != i} e^{s(a_i, a_k)}) )
/// with s the cosine similarity divided by the temperature.
double contrastive_loss(const Matrix& h1, const Matrix& h2, double temperature);

struct LossGradient {
  double loss = 0.0;
  Matrix d_h1;
  Matrix d_h2;
};

LossGradient contrastive_loss_grad(const Matrix& h1, const Matrix& h2, double temperature);

/// A view ready for the encoder: normalised adjacency plus feature matrix.
struct EncoderInput {
  CsrMatrix adj;
  Matrix features;
};

struct Gradients {
  double loss = 0.0;       // contrastive term only
  double objective = 0.0;  // loss + weight_decay / 2 * (|W1|^2 + |W2|^2)
  Matrix d_w1;
  Matrix d_w2;
};

/// Analytic gradient of the objective with respect to W1 and W2.
Gradients gradients(const EncoderParams& params, const EncoderInput& view1,
                    const EncoderInput& view2, const TrainConfig& cfg);

/// Objective value only, for finite-difference checks.
double objective(const EncoderParams& params, const EncoderInput& view1,
                 const EncoderInput& view2, const TrainConfig& cfg);

/// Called once per epoch with the two generated views before the update.
using EpochObserver =
    std::function<void(std::size_t epoch, const GraphView& view1, const GraphView& view2)>;

struct TrainResult {
  EncoderParams params;
  Matrix embedding;  // encoder output on the unaugmented graph
  std::vector<double> loss_trace;
  CandidateFeatureSet candidates1;
  CandidateFeatureSet candidates2;
};

TrainResult train(const AttributedGraph& graph, const FeatureRanking* ranking,
                  const TrainConfig& cfg, const EpochObserver& observer = {});

}  // namespace febaa
