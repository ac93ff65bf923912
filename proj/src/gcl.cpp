#include "febaa/gcl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "febaa/error.hpp"
#include "febaa/ranking.hpp"
#include "febaa/rng.hpp"

namespace febaa {

namespace {

constexpr double kNormEpsilon = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Matrix w(fan_in, fan_out);
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.values()) v = (2.0 * rng.uniform() - 1.0) * bound;
  return w;
}

struct Normalized {
  Matrix unit;
  std::vector<double> norms;  // clamped at kNormEpsilon
};

Normalized normalize_rows(const Matrix& h) {
  Normalized out{Matrix(h.rows(), h.cols()), std::vector<double>(h.rows())};
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const auto src = h.row(i);
    double sq = 0.0;
    for (double v : src) sq += v * v;
    const double norm = std::max(std::sqrt(sq), kNormEpsilon);
    out.norms[i] = norm;
    auto dst = out.unit.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] / norm;
  }
  return out;
}

// Backprop through h / max(|h|, eps) for every row.
Matrix normalize_rows_backward(const Matrix& h, const Normalized& n, const Matrix& d_unit) {
  Matrix d_h(h.rows(), h.cols());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const auto u = n.unit.row(i);
    const auto du = d_unit.row(i);
    auto dh = d_h.row(i);
    const double norm = n.norms[i];
    if (norm <= kNormEpsilon) {
      for (std::size_t j = 0; j < dh.size(); ++j) dh[j] = du[j] / kNormEpsilon;
      continue;
    }
    double dot = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * du[j];
    for (std::size_t j = 0; j < dh.size(); ++j) dh[j] = (du[j] - u[j] * dot) / norm;
  }
  return d_h;
}

// Exponentiated similarities shifted by the upper bound 1/tau, so every
// entry lies in (0, 1].
struct SimilarityTerms {
  Normalized n1, n2;
  Matrix e12, e11, e22;
  std::vector<double> denom1, denom2;
  double shift = 0.0;
  double loss = 0.0;
};

SimilarityTerms similarity_terms(const Matrix& h1, const Matrix& h2, double tau) {
  require(h1.rows() == h2.rows() && h1.cols() == h2.cols(),
          "contrastive loss: views must have the same shape");
  require(h1.rows() >= 2, "contrastive loss: need at least two nodes");
  require(tau > 0.0, "contrastive loss: temperature must be positive");

  SimilarityTerms t;
  t.n1 = normalize_rows(h1);
  t.n2 = normalize_rows(h2);
  t.shift = 1.0 / tau;
  t.e12 = matmul_nt(t.n1.unit, t.n2.unit);
  t.e11 = matmul_nt(t.n1.unit, t.n1.unit);
  t.e22 = matmul_nt(t.n2.unit, t.n2.unit);
  for (Matrix* m : {&t.e12, &t.e11, &t.e22})
    for (double& v : m->values()) v = std::exp(v / tau - t.shift);

  const std::size_t n = h1.rows();
  t.denom1.assign(n, 0.0);
  t.denom2.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      d1 += t.e12(i, k);
      d2 += t.e12(k, i);
      if (k != i) {
        d1 += t.e11(i, k);
        d2 += t.e22(i, k);
      }
    }
    t.denom1[i] = d1;
    t.denom2[i] = d2;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // -log(e^{s_ii} / D) with both numerator and D carrying the same shift.
    const double positive = std::log(t.e12(i, i));
    total += (std::log(t.denom1[i]) - positive) + (std::log(t.denom2[i]) - positive);
  }
  t.loss = total / (2.0 * static_cast<double>(n));
  return t;
}

struct ViewGradient {
  Matrix d_w1;
  Matrix d_w2;
};

ViewGradient backprop_encoder(const EncoderParams& params, const CsrMatrix& adj,
                              const EncoderTrace& trace, const Matrix& d_h) {
  ViewGradient g;
  g.d_w2 = matmul_tn(trace.aa1, d_h);
  const Matrix d_aa1 = matmul_nt(d_h, params.w2);
  // The normalised adjacency is symmetric, so A^T d = A d.
  Matrix d_z1 = adj.multiply(d_aa1);
  auto dz = d_z1.values();
  const auto z = trace.z1.values();
  for (std::size_t i = 0; i < dz.size(); ++i)
    if (!(z[i] > 0.0)) dz[i] = 0.0;
  g.d_w1 = matmul_tn(trace.ax, d_z1);
  return g;
}

void check_dims(const EncoderParams& params, const Matrix& features, const CsrMatrix& adj) {
  require(features.cols() == params.w1.rows(),
          "encode: feature width " + std::to_string(features.cols()) +
              " does not match W1 rows " + std::to_string(params.w1.rows()));
  require(params.w1.cols() == params.w2.rows(), "encode: W1/W2 hidden size mismatch");
  require(adj.dim() == features.rows(), "encode: adjacency/feature node count mismatch");
}

}  // namespace

void TrainConfig::validate() const {
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(temperature > 0.0, "temperature must be positive");
  require(hidden_size >= 1 && output_size >= 1, "hidden_size and output_size must be >= 1");
  view1.validate();
  view2.validate();
}

EncoderParams init_params(std::size_t num_features, std::size_t hidden_size,
                          std::size_t output_size, std::uint64_t seed) {
  Rng rng1(derive_seed(seed, 1));
  Rng rng2(derive_seed(seed, 2));
  return EncoderParams{glorot(num_features, hidden_size, rng1),
                       glorot(hidden_size, output_size, rng2)};
}

EncoderTrace encode_trace(const EncoderParams& params, const CsrMatrix& adj,
                          const Matrix& features) {
  check_dims(params, features, adj);
  EncoderTrace t;
  t.ax = adj.multiply(features);
  t.z1 = matmul(t.ax, params.w1);
  t.a1 = t.z1;
  for (double& v : t.a1.values()) v = v > 0.0 ? v : 0.0;
  t.aa1 = adj.multiply(t.a1);
  t.h = matmul(t.aa1, params.w2);
  return t;
}

Matrix encode(const EncoderParams& params, const CsrMatrix& adj, const Matrix& features) {
  return encode_trace(params, adj, features).h;
}

double contrastive_loss(const Matrix& h1, const Matrix& h2, double temperature) {
  return similarity_terms(h1, h2, temperature).loss;
}

LossGradient contrastive_loss_grad(const Matrix& h1, const Matrix& h2, double temperature) {
  const SimilarityTerms t = similarity_terms(h1, h2, temperature);
  const std::size_t n = h1.rows();
  const double w = 1.0 / (2.0 * static_cast<double>(n));

  // Gradients with respect to the similarity matrices s = cos / tau.
  Matrix g12(n, n), g11(n, n), g22(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double g = w * (t.e12(i, k) / t.denom1[i] + t.e12(i, k) / t.denom2[k]);
      if (i == k) g -= 2.0 * w;
      g12(i, k) = g;
      if (i != k) {
        g11(i, k) = w * t.e11(i, k) / t.denom1[i];
        g22(i, k) = w * t.e22(i, k) / t.denom2[i];
      }
    }
  }
  // Symmetrise the intra-view terms: s11(i,k) and s11(k,i) are one entry.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const double s11 = g11(i, k) + g11(k, i);
      g11(i, k) = g11(k, i) = s11;
      const double s22 = g22(i, k) + g22(k, i);
      g22(i, k) = g22(k, i) = s22;
    }
  }

  const double inv_tau = 1.0 / temperature;
  Matrix d_u1 = matmul(g12, t.n2.unit);
  add_scaled(d_u1, matmul(g11, t.n1.unit), 1.0);
  Matrix d_u2 = matmul_tn(g12, t.n1.unit);
  add_scaled(d_u2, matmul(g22, t.n2.unit), 1.0);
  for (double& v : d_u1.values()) v *= inv_tau;
  for (double& v : d_u2.values()) v *= inv_tau;

  return LossGradient{t.loss, normalize_rows_backward(h1, t.n1, d_u1),
                      normalize_rows_backward(h2, t.n2, d_u2)};
}

Gradients gradients(const EncoderParams& params, const EncoderInput& view1,
                    const EncoderInput& view2, const TrainConfig& cfg) {
  const EncoderTrace t1 = encode_trace(params, view1.adj, view1.features);
  const EncoderTrace t2 = encode_trace(params, view2.adj, view2.features);
  const LossGradient lg = contrastive_loss_grad(t1.h, t2.h, cfg.temperature);

  const ViewGradient g1 = backprop_encoder(params, view1.adj, t1, lg.d_h1);
  const ViewGradient g2 = backprop_encoder(params, view2.adj, t2, lg.d_h2);

  Gradients out;
  out.loss = lg.loss;
  out.d_w1 = g1.d_w1;
  add_scaled(out.d_w1, g2.d_w1, 1.0);
  add_scaled(out.d_w1, params.w1, cfg.weight_decay);
  out.d_w2 = g1.d_w2;
  add_scaled(out.d_w2, g2.d_w2, 1.0);
  add_scaled(out.d_w2, params.w2, cfg.weight_decay);
  out.objective = lg.loss + 0.5 * cfg.weight_decay *
                                (frobenius_sq(params.w1) + frobenius_sq(params.w2));
  return out;
}

double objective(const EncoderParams& params, const EncoderInput& view1,
                 const EncoderInput& view2, const TrainConfig& cfg) {
  const Matrix h1 = encode(params, view1.adj, view1.features);
  const Matrix h2 = encode(params, view2.adj, view2.features);
  return contrastive_loss(h1, h2, cfg.temperature) +
         0.5 * cfg.weight_decay * (frobenius_sq(params.w1) + frobenius_sq(params.w2));
}

TrainResult train(const AttributedGraph& graph, const FeatureRanking* ranking,
                  const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  TrainResult result;
  // Candidate selection happens once per run; only masking is per epoch.
  result.candidates1 = candidate_features(graph, cfg.view1, ranking);
  result.candidates2 = candidate_features(graph, cfg.view2, ranking);
  result.params = init_params(graph.num_features(), cfg.hidden_size, cfg.output_size,
                              derive_seed(cfg.seed, 0x696e6974));
  result.loss_trace.reserve(cfg.epochs);

  const std::size_t n = graph.num_nodes();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng1 = view_rng(cfg.seed, 1, epoch);
    Rng rng2 = view_rng(cfg.seed, 2, epoch);
    GraphView v1 = apply_view(graph, result.candidates1, cfg.view1, rng1);
    GraphView v2 = apply_view(graph, result.candidates2, cfg.view2, rng2);
    if (observer) observer(epoch, v1, v2);

    const EncoderInput in1{normalized_adjacency(n, v1.edges), std::move(v1.features)};
    const EncoderInput in2{normalized_adjacency(n, v2.edges), std::move(v2.features)};
    const Gradients g = gradients(result.params, in1, in2, cfg);

    if (!std::isfinite(g.loss) || !all_finite(g.d_w1) || !all_finite(g.d_w2)) {
      std::ostringstream msg;
      msg << "non-finite " << (std::isfinite(g.loss) ? "gradient" : "loss")
          << " at epoch " << epoch << "; loss trace tail:";
      const std::size_t from = result.loss_trace.size() > 5 ? result.loss_trace.size() - 5 : 0;
      for (std::size_t e = from; e < result.loss_trace.size(); ++e)
        msg << ' ' << e << '=' << format_double(result.loss_trace[e]);
      throw Error(ErrorCode::kTraining, msg.str());
    }
    result.loss_trace.push_back(g.loss);
    add_scaled(result.params.w1, g.d_w1, -cfg.learning_rate);
    add_scaled(result.params.w2, g.d_w2, -cfg.learning_rate);
  }

  result.embedding = encode(result.params, normalized_adjacency(graph), graph.features());
  return result;
}

}  // namespace febaa
