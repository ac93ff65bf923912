#include "febaa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "febaa/error.hpp"
#include "febaa/rng.hpp"

namespace febaa {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kEvaluation, what);
}

Matrix gather_rows(const Matrix& m, std::span<const NodeId> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::vector<Label> gather(std::span<const Label> values, std::span<const NodeId> idx) {
  std::vector<Label> out;
  out.reserve(idx.size());
  for (NodeId i : idx) out.push_back(values[i]);
  return out;
}

// Column z-scoring with statistics of `fit`, applied to both matrices.
void standardize(Matrix& fit, Matrix& other) {
  const std::size_t m = fit.rows();
  for (std::size_t j = 0; j < fit.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += fit(i, j);
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) var += (fit(i, j) - mean) * (fit(i, j) - mean);
    var /= static_cast<double>(m);
    const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < m; ++i) fit(i, j) = (fit(i, j) - mean) / sd;
    for (std::size_t i = 0; i < other.rows(); ++i) other(i, j) = (other(i, j) - mean) / sd;
  }
}

}  // namespace

void EvalSettings::validate() const {
  if (splits < 1) throw Error(ErrorCode::kInvalidArgument, "eval.splits must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "eval.train_fraction must be in (0, 1)");
  if (!(l2 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eval.l2 must be non-negative");
  if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "eval.iterations must be >= 1");
}

SplitSet generate_splits(std::size_t num_labeled, double train_fraction,
                         std::size_t n_splits, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must be in (0, 1)");
  if (n_splits < 1) throw Error(ErrorCode::kInvalidArgument, "n_splits must be >= 1");
  const auto train_size = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(num_labeled) + 0.5 + 1e-9));
  require(train_size > 0 && train_size < num_labeled,
          "degenerate split: " + std::to_string(train_size) + " of " +
              std::to_string(num_labeled) + " nodes in the training part");

  SplitSet set;
  set.train_fraction = train_fraction;
  set.seed = seed;
  for (std::size_t s = 0; s < n_splits; ++s) {
    std::vector<NodeId> perm(num_labeled);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    Rng rng(derive_seed(seed, s));
    rng.shuffle(std::span<NodeId>(perm));
    Split split;
    split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_size));
    split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_size), perm.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    set.splits.push_back(std::move(split));
  }
  return set;
}

std::vector<Label> LogRegModel::predict(const Matrix& x) const {
  const Matrix logits = matmul(x, weights);
  std::vector<Label> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] + bias[c] > row[best] + bias[best]) best = c;
    out[i] = static_cast<Label>(best);
  }
  return out;
}

LogRegObjective logreg_objective(const LogRegModel& model, const Matrix& x,
                                 std::span<const Label> y, double l2) {
  const std::size_t m = x.rows();
  const std::size_t classes = model.bias.size();
  Matrix logits = matmul(x, model.weights);
  Matrix d_logits(m, classes);
  double ce = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto z = logits.row(i);
    double top = z[0] + model.bias[0];
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] += model.bias[c];
      top = std::max(top, z[c]);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - top);
    const double log_sum = std::log(sum) + top;
    ce += log_sum - z[y[i]];
    auto d = d_logits.row(i);
    for (std::size_t c = 0; c < classes; ++c)
      d[c] = (std::exp(z[c] - log_sum) - (c == y[i] ? 1.0 : 0.0)) * inv_m;
  }
  LogRegObjective out;
  out.value = ce * inv_m + l2 * frobenius_sq(model.weights);
  out.d_weights = matmul_tn(x, d_logits);
  add_scaled(out.d_weights, model.weights, 2.0 * l2);
  out.d_bias.assign(classes, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < classes; ++c) out.d_bias[c] += d_logits(i, c);
  return out;
}

LogRegModel fit_logreg(const Matrix& x, std::span<const Label> y, std::size_t num_classes,
                       double l2, std::size_t iterations) {
  require(x.rows() == y.size(), "fit_logreg: row/label count mismatch");
  require(x.rows() > 0, "fit_logreg: empty training set");
  std::vector<bool> seen(num_classes, false);
  std::size_t distinct = 0;
  for (Label c : y) {
    require(c < num_classes, "fit_logreg: label out of range");
    if (!seen[c]) {
      seen[c] = true;
      ++distinct;
    }
  }
  require(distinct >= 2, "fit_logreg: single-class training set");

  // The softmax cross-entropy Hessian is bounded by 1/2 * E[|x~|^2] with
  // x~ = (x, 1); the penalty adds 2 * l2.
  double mean_sq = 0.0;
  for (double v : x.values()) mean_sq += v * v;
  mean_sq = mean_sq / static_cast<double>(x.rows()) + 1.0;
  const double step = 1.0 / (0.5 * mean_sq + 2.0 * l2);

  LogRegModel model{Matrix(x.cols(), num_classes), std::vector<double>(num_classes, 0.0)};
  for (std::size_t it = 0; it < iterations; ++it) {
    const LogRegObjective obj = logreg_objective(model, x, y, l2);
    add_scaled(model.weights, obj.d_weights, -step);
    for (std::size_t c = 0; c < num_classes; ++c) model.bias[c] -= step * obj.d_bias[c];
  }
  return model;
}

double micro_f1(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size())
    throw Error(ErrorCode::kInvalidArgument, "micro_f1: length mismatch");
  if (predictions.empty()) throw Error(ErrorCode::kInvalidArgument, "micro_f1: empty input");
  // Pooled over classes: every miss is one false positive (for the predicted
  // class) and one false negative (for the true class).
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predictions[i] == truth[i]) {
      ++tp;
    } else {
      ++fp;
      ++fn;
    }
  }
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

std::string EvalResult::summary() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", mean_f1, std_f1);
  return buf;
}

EvalResult summarize_scores(std::vector<double> scores) {
  EvalResult r;
  r.per_split_scores = std::move(scores);
  if (r.per_split_scores.empty()) return r;
  const double n = static_cast<double>(r.per_split_scores.size());
  double sum = 0.0;
  for (double s : r.per_split_scores) sum += s;
  r.mean_f1 = sum / n;
  double var = 0.0;
  for (double s : r.per_split_scores) var += (s - r.mean_f1) * (s - r.mean_f1);
  r.std_f1 = std::sqrt(var / n);
  return r;
}

EvalResult linear_evaluate(const Matrix& embedding, std::span<const Label> labels,
                           const SplitSet& splits, double l2, std::size_t iterations) {
  require(embedding.rows() == labels.size(), "linear_evaluate: embedding/label count mismatch");
  std::size_t classes = 0;
  for (Label y : labels) classes = std::max<std::size_t>(classes, y + 1);

  std::vector<double> scores;
  scores.reserve(splits.splits.size());
  for (const Split& split : splits.splits) {
    Matrix x_train = gather_rows(embedding, split.train);
    Matrix x_test = gather_rows(embedding, split.test);
    standardize(x_train, x_test);
    const auto y_train = gather(labels, split.train);
    const auto y_test = gather(labels, split.test);
    const LogRegModel model = fit_logreg(x_train, y_train, classes, l2, iterations);
    scores.push_back(100.0 * micro_f1(model.predict(x_test), y_test));
  }
  return summarize_scores(std::move(scores));
}

}  // namespace febaa
