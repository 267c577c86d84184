#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "feddro/constants.hpp"
#include "feddro/linalg.hpp"
#include "feddro/rng.hpp"

namespace feddro {

// Opaque sample handle.  For finite-sample clients it is a sample index; for
// generative clients it seeds the noise draw.  Evaluating two points with the
// same token realizes the "same sample at both points" contract used by the
// momentum embedding estimator.
using SampleToken = std::uint64_t;

// One client's oracle: exact (full-information) evaluation of h_k and g_k and
// token-based sampled evaluation.  Exact g_k equals the mean of the sampled
// g_k over the full local sample set for finite-sample clients.
struct ClientOracle {
  // Number of local samples behind h_k / g_k.  0 means generative (infinite
  // population); deterministic clients are modeled as a single sample.
  int n_h = 1;
  int n_g = 1;

  std::function<double(const Vec&)> h;
  std::function<Vec(const Vec&)> grad_h;
  std::function<Vec(const Vec&)> g;       // d_g-vector
  std::function<Mat(const Vec&)> jac_g;   // d_g x d

  std::function<double(const Vec&, SampleToken)> h_sample;
  std::function<Vec(const Vec&, SampleToken)> grad_h_sample;
  std::function<Vec(const Vec&, SampleToken)> g_sample;
  std::function<Mat(const Vec&, SampleToken)> jac_g_sample;

  SampleToken draw_h(RngStream& rng) const {
    if (n_h > 0) return rng() % static_cast<std::uint64_t>(n_h);
    return rng();
  }
  SampleToken draw_g(RngStream& rng) const {
    if (n_g > 0) return rng() % static_cast<std::uint64_t>(n_g);
    return rng();
  }
};

struct OuterMap {
  std::function<double(const Vec&)> value;  // f: R^{d_g} -> R
  std::function<Vec(const Vec&)> grad;      // d_g-vector
  bool constant = false;                    // f identically constant (pure h problems)
};

// Federated compositional objective Phi = (1/K) sum h_k + f((1/K) sum g_k).
struct CompositionalProblem {
  std::string kind;
  int dim_x = 0;
  int dim_g = 1;
  std::vector<ClientOracle> clients;
  OuterMap outer;
  LipschitzConstants constants;

  int num_clients() const { return static_cast<int>(clients.size()); }
};

// Finite-sample client data: n_k rows of d features plus a label.
struct ClientDataset {
  std::vector<Vec> features;
  std::vector<double> labels;

  std::size_t size() const { return features.size(); }
  bool empty() const { return features.empty(); }
};

// Loss family with closed-form gradients, ell(x; (a, y)).
struct LossModel {
  std::string name;
  std::function<double(const Vec& x, const Vec& a, double y)> value;
  std::function<Vec(const Vec& x, const Vec& a, double y)> grad;
  // Conservative bounds over { ||x|| <= radius } for a single sample (a, y):
  // max |ell|, max ||grad ell||, smoothness of ell.
  std::function<double(const Vec& a, double y, double radius)> bound_value;
  std::function<double(const Vec& a, double y, double radius)> bound_grad;
  std::function<double(const Vec& a, double y, double radius)> bound_smooth;
};

// Binary logistic loss with labels in {-1, +1}: log(1 + exp(-y a'x)).
inline LossModel logistic_loss() {
  LossModel m;
  m.name = "logistic";
  m.value = [](const Vec& x, const Vec& a, double y) {
    const double z = -y * dot(a, x);
    // log1p(exp(z)) with overflow guard
    return z > 30.0 ? z : std::log1p(std::exp(z));
  };
  m.grad = [](const Vec& x, const Vec& a, double y) {
    const double z = -y * dot(a, x);
    const double s = z > 30.0 ? 1.0 : std::exp(z) / (1.0 + std::exp(z));
    Vec g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) g[i] = -y * s * a[i];
    return g;
  };
  m.bound_value = [](const Vec& a, double, double r) {
    return std::log(2.0) + norm(a) * r;
  };
  m.bound_grad = [](const Vec& a, double, double) { return norm(a); };
  m.bound_smooth = [](const Vec& a, double, double) { return 0.25 * norm_sq(a); };
  return m;
}

// Squared loss 0.5 (a'x - y)^2.
inline LossModel squared_loss() {
  LossModel m;
  m.name = "squared";
  m.value = [](const Vec& x, const Vec& a, double y) {
    const double r = dot(a, x) - y;
    return 0.5 * r * r;
  };
  m.grad = [](const Vec& x, const Vec& a, double y) {
    const double r = dot(a, x) - y;
    Vec g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) g[i] = r * a[i];
    return g;
  };
  m.bound_value = [](const Vec& a, double y, double r) {
    const double m2 = norm(a) * r + std::abs(y);
    return 0.5 * m2 * m2;
  };
  m.bound_grad = [](const Vec& a, double y, double r) {
    return norm(a) * (norm(a) * r + std::abs(y));
  };
  m.bound_smooth = [](const Vec& a, double, double) { return norm_sq(a); };
  return m;
}

inline LossModel make_loss(const std::string& name) {
  if (name == "logistic") return logistic_loss();
  if (name == "squared") return squared_loss();
  throw std::invalid_argument("unknown loss family: " + name);
}

// Exact mean of g_k over clients.
inline Vec eval_true_g(const CompositionalProblem& p, const Vec& x) {
  check_dim(x, static_cast<std::size_t>(p.dim_x), "eval_true_g");
  Vec g(p.dim_g, 0.0);
  for (const auto& c : p.clients) axpy(1.0 / p.num_clients(), c.g(x), g);
  return g;
}

inline double eval_true_phi(const CompositionalProblem& p, const Vec& x) {
  check_dim(x, static_cast<std::size_t>(p.dim_x), "eval_true_phi");
  double hv = 0.0;
  for (const auto& c : p.clients) hv += c.h(x);
  hv /= p.num_clients();
  return hv + p.outer.value(eval_true_g(p, x));
}

// Chain rule with the exact inner mean:
// grad Phi(x) = (1/K) sum [ grad h_k(x) + J_{g_k}(x)^T grad f(g(x)) ].
inline Vec eval_true_grad_phi(const CompositionalProblem& p, const Vec& x) {
  check_dim(x, static_cast<std::size_t>(p.dim_x), "eval_true_grad_phi");
  const Vec gf = p.outer.grad(eval_true_g(p, x));
  Vec out(p.dim_x, 0.0);
  const double w = 1.0 / p.num_clients();
  for (const auto& c : p.clients) {
    axpy(w, c.grad_h(x), out);
    axpy(w, jac_transpose_mul(c.jac_g(x), gf), out);
  }
  return out;
}

namespace detail {

// Deterministic client: sampled evaluation equals the exact one.
inline void make_deterministic(ClientOracle& c) {
  c.n_h = 1;
  c.n_g = 1;
  c.h_sample = [c](const Vec& x, SampleToken) { return c.h(x); };
  c.grad_h_sample = [c](const Vec& x, SampleToken) { return c.grad_h(x); };
  c.g_sample = [c](const Vec& x, SampleToken) { return c.g(x); };
  c.jac_g_sample = [c](const Vec& x, SampleToken) { return c.jac_g(x); };
}

inline ClientOracle zero_h_client(int dim_x) {
  ClientOracle c;
  c.h = [](const Vec&) { return 0.0; };
  c.grad_h = [dim_x](const Vec&) { return Vec(dim_x, 0.0); };
  c.h_sample = [](const Vec&, SampleToken) { return 0.0; };
  c.grad_h_sample = [dim_x](const Vec&, SampleToken) { return Vec(dim_x, 0.0); };
  return c;
}

}  // namespace detail

}  // namespace feddro
