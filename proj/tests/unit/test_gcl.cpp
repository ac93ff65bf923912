#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "febaa/error.hpp"
#include "febaa/gcl.hpp"
#include "febaa/synthetic.hpp"
#include "oracles.hpp"

using namespace febaa;

namespace {

struct Instance {
  EncoderParams params;
  EncoderInput view1;
  EncoderInput view2;
  TrainConfig cfg;
};

Instance random_instance(std::size_t n, std::size_t f, std::size_t hidden, std::size_t out,
                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Instance inst;
  inst.cfg.hidden_size = hidden;
  inst.cfg.output_size = out;
  inst.cfg.temperature = 0.5;
  inst.cfg.weight_decay = 1e-3;
  inst.params = EncoderParams{oracle::random_matrix(f, hidden, gen),
                              oracle::random_matrix(hidden, out, gen)};
  const Matrix x = oracle::random_matrix(n, f, gen);
  Matrix x2 = x;
  for (std::size_t i = 0; i < n; ++i) x2(i, gen() % f) = 0.0;
  inst.view1 = EncoderInput{normalized_adjacency(n, oracle::random_edges(n, 0.3, gen)), x};
  inst.view2 = EncoderInput{normalized_adjacency(n, oracle::random_edges(n, 0.3, gen)), x2};
  return inst;
}

// Central differences of the objective with respect to every weight.
std::vector<double> numeric_gradient(Instance& inst, double h) {
  std::vector<double> out;
  for (Matrix* w : {&inst.params.w1, &inst.params.w2}) {
    for (double& v : w->values()) {
      const double saved = v;
      v = saved + h;
      const double up = objective(inst.params, inst.view1, inst.view2, inst.cfg);
      v = saved - h;
      const double down = objective(inst.params, inst.view1, inst.view2, inst.cfg);
      v = saved;
      out.push_back((up - down) / (2.0 * h));
    }
  }
  return out;
}

std::vector<double> flatten(const Gradients& g) {
  std::vector<double> out(g.d_w1.values().begin(), g.d_w1.values().end());
  out.insert(out.end(), g.d_w2.values().begin(), g.d_w2.values().end());
  return out;
}

}  // namespace

TEST_CASE("zero features encode to zero") {
  std::mt19937_64 gen(1);
  const EncoderParams p{oracle::random_matrix(3, 4, gen), oracle::random_matrix(4, 2, gen)};
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}};
  const Matrix h = encode(p, normalized_adjacency(4, edges), Matrix(4, 3));
  CHECK(h == Matrix(4, 2));
}

TEST_CASE("isolated node with identity-padded weights returns relu of its features") {
  Matrix w1(3, 4), w2(4, 2);
  for (std::size_t i = 0; i < 3; ++i) w1(i, i) = 1.0;
  for (std::size_t i = 0; i < 2; ++i) w2(i, i) = 1.0;
  Matrix x(1, 3);
  x(0, 0) = 1.0;
  x(0, 1) = -2.0;
  x(0, 2) = 3.0;
  const Matrix h = encode({w1, w2}, normalized_adjacency(1, {}), x);
  CHECK(h(0, 0) == 1.0);
  CHECK(h(0, 1) == 0.0);
}

TEST_CASE("encoder matches the dense oracle on a random 12 x 5 instance") {
  std::mt19937_64 gen(2);
  const auto edges = oracle::random_edges(12, 0.25, gen);
  const Matrix x = oracle::random_matrix(12, 5, gen);
  const EncoderParams p{oracle::random_matrix(5, 6, gen), oracle::random_matrix(6, 3, gen)};
  const Matrix h = encode(p, normalized_adjacency(12, edges), x);
  const auto expect = oracle::encode(oracle::normalized_adjacency(12, edges), oracle::to_dense(x),
                                     oracle::to_dense(p.w1), oracle::to_dense(p.w2));
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(h(i, j) - expect[i][j]) <= 1e-10);
}

TEST_CASE("two orthogonal nodes give the closed-form loss -log(e / (e + 2))") {
  Matrix h(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const double expect = -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0));
  CHECK(std::abs(contrastive_loss(h, h, 1.0) - expect) <= 1e-12);
}

TEST_CASE("loss matches brute-force pairwise summation") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_matrix(6, 4, gen);
    const Matrix b = oracle::random_matrix(6, 4, gen);
    for (double tau : {0.2, 0.5, 1.0}) {
      const double expect = oracle::contrastive_loss(oracle::to_dense(a), oracle::to_dense(b), tau);
      CHECK(std::abs(contrastive_loss(a, b, tau) - expect) <= 1e-10);
    }
  }
}

TEST_CASE("loss is symmetric in the two views") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_matrix(7, 3, gen);
    const Matrix b = oracle::random_matrix(7, 3, gen);
    CHECK(std::abs(contrastive_loss(a, b, 0.5) - contrastive_loss(b, a, 0.5)) <= 1e-12);
  }
}

TEST_CASE("loss is invariant to positive row scaling") {
  std::mt19937_64 gen(5);
  const Matrix a = oracle::random_matrix(6, 4, gen);
  const Matrix b = oracle::random_matrix(6, 4, gen);
  const double base = contrastive_loss(a, b, 0.5);
  Matrix a5 = a, b5 = b;
  for (double& v : a5.values()) v *= 5.0;
  for (double& v : b5.values()) v *= 5.0;
  CHECK(std::abs(contrastive_loss(a5, b5, 0.5) - base) <= 1e-10);
  for (std::size_t row = 0; row < 6; ++row) {
    Matrix one = b;
    for (double& v : one.row(row)) v *= 3.7;
    CHECK(std::abs(contrastive_loss(a, one, 0.5) - base) <= 1e-10);
  }
}

TEST_CASE("loss is non-negative") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_matrix(5, 3, gen);
    CHECK(contrastive_loss(a, a, 0.3) >= 0.0);
    CHECK(contrastive_loss(a, oracle::random_matrix(5, 3, gen), 0.3) >= 0.0);
  }
}

TEST_CASE("analytic gradients match central differences on a 12 x 5 instance") {
  Instance inst = random_instance(12, 5, 4, 3, 7);
  const Gradients g = gradients(inst.params, inst.view1, inst.view2, inst.cfg);
  CHECK(g.objective == doctest::Approx(objective(inst.params, inst.view1, inst.view2, inst.cfg)));
  const double err = oracle::max_relative_error(flatten(g), numeric_gradient(inst, 1e-5));
  CHECK(err < 1e-4);
}

TEST_CASE("loss gradient with respect to embeddings matches central differences") {
  std::mt19937_64 gen(8);
  Matrix h1 = oracle::random_matrix(5, 3, gen);
  Matrix h2 = oracle::random_matrix(5, 3, gen);
  const LossGradient g = contrastive_loss_grad(h1, h2, 0.5);
  CHECK(g.loss == doctest::Approx(contrastive_loss(h1, h2, 0.5)).epsilon(1e-14));
  std::vector<double> analytic, numeric;
  for (auto [m, d] : {std::pair{&h1, &g.d_h1}, std::pair{&h2, &g.d_h2}}) {
    for (std::size_t k = 0; k < m->size(); ++k) {
      double& v = m->values()[k];
      const double saved = v;
      v = saved + 1e-6;
      const double up = contrastive_loss(h1, h2, 0.5);
      v = saved - 1e-6;
      const double down = contrastive_loss(h1, h2, 0.5);
      v = saved;
      numeric.push_back((up - down) / 2e-6);
      analytic.push_back(d->values()[k]);
    }
  }
  CHECK(oracle::max_relative_error(analytic, numeric) < 1e-5);
}

TEST_CASE("with zero features only weight decay contributes to the gradient") {
  std::mt19937_64 gen(9);
  TrainConfig cfg;
  cfg.hidden_size = 4;
  cfg.output_size = 3;
  cfg.weight_decay = 0.01;
  const EncoderParams p{oracle::random_matrix(5, 4, gen), oracle::random_matrix(4, 3, gen)};
  const std::vector<Edge> edges{{0, 1}, {2, 3}};
  const EncoderInput in{normalized_adjacency(6, edges), Matrix(6, 5)};
  const Gradients g = gradients(p, in, in, cfg);
  for (std::size_t k = 0; k < p.w1.size(); ++k)
    CHECK(g.d_w1.values()[k] == 0.01 * p.w1.values()[k]);
  for (std::size_t k = 0; k < p.w2.size(); ++k)
    CHECK(g.d_w2.values()[k] == 0.01 * p.w2.values()[k]);
}

TEST_CASE("identical views with a large temperature give finite gradients") {
  Instance inst = random_instance(8, 4, 3, 2, 10);
  inst.cfg.temperature = 1e6;
  const Gradients g = gradients(inst.params, inst.view1, inst.view1, inst.cfg);
  CHECK(std::isfinite(g.loss));
  CHECK(all_finite(g.d_w1));
  CHECK(all_finite(g.d_w2));
}

TEST_CASE("zero training epochs leave the random initialisation in place") {
  SbmSpec spec;
  spec.seed = 4;
  const AttributedGraph g = make_sbm(spec);
  TrainConfig cfg;
  cfg.seed = 12;
  cfg.epochs = 0;
  const TrainResult none = train(g, nullptr, cfg);
  CHECK(none.loss_trace.empty());
  CHECK(none.embedding == encode(none.params, normalized_adjacency(g), g.features()));
  cfg.epochs = 3;
  cfg.learning_rate = 1e-300;
  cfg.weight_decay = 0.0;
  const TrainResult frozen = train(g, nullptr, cfg);
  CHECK(frozen.params == none.params);
  CHECK(frozen.embedding == none.embedding);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  SbmSpec spec;
  spec.seed = 5;
  const AttributedGraph g = make_sbm(spec);
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.epochs = 15;
  cfg.view1.masking_probability = 0.3;
  cfg.view1.edge_drop_probability = 0.2;
  cfg.view2.mode = SelectionMode::kRandom;
  cfg.view2.masking_ratio = 0.5;
  cfg.view2.masking_probability = 0.5;
  cfg.view2.edge_drop_probability = 0.4;
  cfg.view2.rng_seed = 8;
  const TrainResult a = train(g, nullptr, cfg);
  const TrainResult b = train(g, nullptr, cfg);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.embedding == b.embedding);
  cfg.seed = 4;
  CHECK(train(g, nullptr, cfg).loss_trace != a.loss_trace);
}

TEST_CASE("loss decreases over training on the SBM fixture") {
  SbmSpec spec;
  spec.num_features = 32;
  spec.seed = 6;
  const AttributedGraph g = make_sbm(spec);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.view1.masking_probability = 0.2;
  cfg.view2.masking_probability = 0.3;
  cfg.view1.edge_drop_probability = 0.2;
  cfg.view2.edge_drop_probability = 0.3;
  const TrainResult r = train(g, nullptr, cfg);
  CHECK(r.loss_trace.back() < r.loss_trace.front());
}

TEST_CASE("candidate features are chosen once and masks stay inside them") {
  SbmSpec spec;
  spec.seed = 7;
  const AttributedGraph g = make_sbm(spec);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.view1.mode = SelectionMode::kRandom;
  cfg.view1.masking_ratio = 0.25;
  cfg.view1.masking_probability = 0.9;
  cfg.view1.rng_seed = 31;
  std::set<FeatureIndex> masked;
  const TrainResult r = train(g, nullptr, cfg,
                              [&](std::size_t, const GraphView& v1, const GraphView&) {
                                masked.insert(v1.masked_columns.begin(), v1.masked_columns.end());
                              });
  CHECK(r.candidates1.size() == 4);
  for (FeatureIndex j : masked) CHECK(r.candidates1.contains(j));
  CHECK(masked.size() == 4);
}

TEST_CASE("divergence is reported as a training error with the loss trace") {
  SbmSpec spec;
  spec.seed = 8;
  const AttributedGraph g = make_sbm(spec);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e300;
  cfg.weight_decay = 1.0;
  try {
    train(g, nullptr, cfg);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTraining);
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.temperature = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.hidden_size = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
