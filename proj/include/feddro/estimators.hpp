#pragma once

#include <stdexcept>
#include <vector>

#include "feddro/problem.hpp"

namespace feddro {

// Per-client per-iteration sample counts for the h- and g-oracles.
struct BatchSpec {
  int batch_h = 1;
  int batch_g = 1;

  void validate() const {
    if (batch_h < 1 || batch_g < 1) throw std::invalid_argument("BatchSpec: zero batch");
  }
};

// Draws a batch of g-sample tokens.  A finite-sample client whose batch covers
// its full local sample set is enumerated in order instead of sampled, so the
// batch mean is the exact local mean and repeated calls are identical.
inline std::vector<SampleToken> draw_g_batch(const ClientOracle& client, int batch_g,
                                             RngStream& rng) {
  if (batch_g < 1) throw std::invalid_argument("draw_g_batch: zero batch");
  std::vector<SampleToken> tokens;
  if (client.n_g > 0 && batch_g >= client.n_g) {
    tokens.resize(client.n_g);
    for (int i = 0; i < client.n_g; ++i) tokens[i] = i;
    return tokens;
  }
  tokens.resize(batch_g);
  for (auto& t : tokens) t = client.draw_g(rng);
  return tokens;
}

inline std::vector<SampleToken> draw_h_batch(const ClientOracle& client, int batch_h,
                                             RngStream& rng) {
  if (batch_h < 1) throw std::invalid_argument("draw_h_batch: zero batch");
  std::vector<SampleToken> tokens;
  if (client.n_h > 0 && batch_h >= client.n_h) {
    tokens.resize(client.n_h);
    for (int i = 0; i < client.n_h; ++i) tokens[i] = i;
    return tokens;
  }
  tokens.resize(batch_h);
  for (auto& t : tokens) t = client.draw_h(rng);
  return tokens;
}

inline Vec batch_mean_g_tokens(const ClientOracle& client, const Vec& x,
                               const std::vector<SampleToken>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("batch_mean_g: zero batch");
  Vec mean = client.g_sample(x, tokens.front());
  for (std::size_t i = 1; i < tokens.size(); ++i)
    axpy(1.0, client.g_sample(x, tokens[i]), mean);
  scale(mean, 1.0 / tokens.size());
  return mean;
}

inline Vec batch_mean_g(const ClientOracle& client, const Vec& x, int batch_g,
                        RngStream& rng) {
  return batch_mean_g_tokens(client, x, draw_g_batch(client, batch_g, rng));
}

// Compositional stochastic gradient:
//   batch-mean grad h_k(x; xi) + (batch-mean J_{g_k}(x; zeta))^T grad f(y_bar).
// Conditionally unbiased for grad h_k(x) + J_{g_k}(x)^T grad f(y_bar) given y_bar.
inline Vec stochastic_phi_grad_tokens(const ClientOracle& client, const OuterMap& outer,
                                      const Vec& x, const Vec& y_bar,
                                      const std::vector<SampleToken>& h_tokens,
                                      const std::vector<SampleToken>& g_tokens) {
  if (h_tokens.empty() || g_tokens.empty())
    throw std::invalid_argument("stochastic_phi_grad: zero batch");
  Vec grad(x.size(), 0.0);
  for (SampleToken t : h_tokens) axpy(1.0 / h_tokens.size(), client.grad_h_sample(x, t), grad);
  const Vec gf = outer.grad(y_bar);
  for (SampleToken t : g_tokens)
    axpy(1.0 / g_tokens.size(), jac_transpose_mul(client.jac_g_sample(x, t), gf), grad);
  return grad;
}

inline Vec stochastic_phi_grad(const ClientOracle& client, const OuterMap& outer, const Vec& x,
                               const Vec& y_bar, const BatchSpec& batch, RngStream& rng) {
  batch.validate();
  return stochastic_phi_grad_tokens(client, outer, x, y_bar,
                                    draw_h_batch(client, batch.batch_h, rng),
                                    draw_g_batch(client, batch.batch_g, rng));
}

// Hybrid SARAH/SGD momentum estimate of the embedding:
//   y_t = (1 - beta) (y_prev - g_hat(x_prev)) + g_hat(x_t),
// with the SAME sample batch evaluated at both anchors.  beta = 1 degenerates
// to the plain batch mean at x_t.
inline Vec momentum_embedding_update_tokens(const ClientOracle& client, const Vec& x_t,
                                            const Vec& x_prev, const Vec& y_prev, double beta,
                                            const std::vector<SampleToken>& g_tokens) {
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("momentum_embedding_update: beta outside [0,1]");
  if (x_t.size() != x_prev.size())
    throw std::invalid_argument("momentum_embedding_update: dimension mismatch");
  Vec y = batch_mean_g_tokens(client, x_t, g_tokens);
  if (beta < 1.0) {
    const Vec g_prev = batch_mean_g_tokens(client, x_prev, g_tokens);
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += (1.0 - beta) * (y_prev[i] - g_prev[i]);
  }
  return y;
}

inline Vec momentum_embedding_update(const ClientOracle& client, const Vec& x_t,
                                     const Vec& x_prev, const Vec& y_prev, double beta,
                                     int batch_g, RngStream& rng) {
  return momentum_embedding_update_tokens(client, x_t, x_prev, y_prev, beta,
                                          draw_g_batch(client, batch_g, rng));
}

}  // namespace feddro
