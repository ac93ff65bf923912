#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "febaa/graph.hpp"
#include "febaa/matrix.hpp"

namespace febaa {

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> test;

  bool operator==(const Split&) const = default;
};

struct SplitSet {
  std::vector<Split> splits;
  double train_fraction = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const SplitSet&) const = default;
};

struct EvalSettings {
  std::size_t splits = 20;
  double train_fraction = 0.1;
  double l2 = 1e-4;
  std::size_t iterations = 500;

  void validate() const;
  bool operator==(const EvalSettings&) const = default;
};

/// Independent random partitions of 0..num_labeled-1; each train part holds
/// round(train_fraction * num_labeled) nodes.
SplitSet generate_splits(std::size_t num_labeled, double train_fraction,
                         std::size_t n_splits, std::uint64_t seed);

/// Multinomial logistic regression: logits = x W + b.
struct LogRegModel {
  Matrix weights;             // d x C
  std::vector<double> bias;   // C

  std::vector<Label> predict(const Matrix& x) const;
};

/// Mean cross-entropy + l2 * |W|^2 (bias unpenalised), with its gradient.
struct LogRegObjective {
  double value = 0.0;
  Matrix d_weights;
  std::vector<double> d_bias;
};

LogRegObjective logreg_objective(const LogRegModel& model, const Matrix& x,
                                 std::span<const Label> y, double l2);

/// Full-batch gradient descent from zero for a fixed number of iterations.
/// The step size is 1 / L for a Lipschitz bound L of the gradient.
LogRegModel fit_logreg(const Matrix& x, std::span<const Label> y, std::size_t num_classes,
                       double l2, std::size_t iterations);

/// Micro-averaged F1 over all classes. For single-label multiclass data this
/// equals accuracy.
double micro_f1(std::span<const Label> predictions, std::span<const Label> truth);

struct EvalResult {
  double mean_f1 = 0.0;  // percent
  double std_f1 = 0.0;   // percent, population standard deviation
  std::vector<double> per_split_scores;  // percent

  /// "mean±std" with two decimals, the layout of the reported tables.
  std::string summary() const;
};

EvalResult summarize_scores(std::vector<double> scores);

/// Fits one classifier per split on frozen embeddings and reports micro-F1.
/// Columns are standardised with training-part statistics before fitting.
EvalResult linear_evaluate(const Matrix& embedding, std::span<const Label> labels,
                           const SplitSet& splits, double l2, std::size_t iterations);

}  // namespace febaa
