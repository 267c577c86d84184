#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "feddro/problem.hpp"
#include "feddro/rng.hpp"

namespace feddro {

// ---------------------------------------------------------------------------
// Two-client scalar counterexample: g_1(x) = 4x - 4, g_2(x) = -2x + 4,
// f(y) = sqrt(y^2 + 4), h = 0.  Aggregate Phi(x) = sqrt(x^2 + 4).
// ---------------------------------------------------------------------------
inline CompositionalProblem build_counterexample() {
  CompositionalProblem p;
  p.kind = "counterexample";
  p.dim_x = 1;
  p.dim_g = 1;

  auto linear_client = [](double slope, double intercept) {
    ClientOracle c = detail::zero_h_client(1);
    c.g = [slope, intercept](const Vec& x) { return Vec{slope * x[0] + intercept}; };
    c.jac_g = [slope](const Vec&) {
      Mat j(1, 1);
      j(0, 0) = slope;
      return j;
    };
    detail::make_deterministic(c);
    return c;
  };
  p.clients.push_back(linear_client(4.0, -4.0));
  p.clients.push_back(linear_client(-2.0, 4.0));

  p.outer.value = [](const Vec& y) { return std::sqrt(y[0] * y[0] + 4.0); };
  p.outer.grad = [](const Vec& y) { return Vec{y[0] / std::sqrt(y[0] * y[0] + 4.0)}; };

  p.constants.B_g = 4.0;
  p.constants.B_f = 1.0;
  p.constants.L_f = 0.5;
  p.constants.delta_g = 3.0;  // max(|4-1|, |-2-1|)
  return p;
}

// ---------------------------------------------------------------------------
// DRO reformulations over per-client finite samples
// ---------------------------------------------------------------------------

namespace detail {

struct SampleBounds {
  double value = 0.0;   // max |ell| over samples in the domain ball
  double grad = 0.0;    // max ||grad ell||
  double smooth = 0.0;  // max smoothness constant of ell
};

inline SampleBounds loss_bounds(const std::vector<ClientDataset>& shards,
                                const LossModel& loss, double radius) {
  SampleBounds b;
  for (const auto& s : shards)
    for (std::size_t i = 0; i < s.size(); ++i) {
      b.value = std::max(b.value, loss.bound_value(s.features[i], s.labels[i], radius));
      b.grad = std::max(b.grad, loss.bound_grad(s.features[i], s.labels[i], radius));
      b.smooth = std::max(b.smooth, loss.bound_smooth(s.features[i], s.labels[i], radius));
    }
  return b;
}

inline void check_dro_inputs(const std::vector<ClientDataset>& shards, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("dro: lambda must be positive");
  if (shards.empty()) throw std::invalid_argument("dro: no clients");
  for (const auto& s : shards)
    if (s.empty()) throw std::invalid_argument("dro: empty client dataset");
}

}  // namespace detail

// KL-regularized DRO: g_k(x) = local mean of exp(ell(x)/lambda), f(y) = lambda log y,
// h = 0.  The objective equals the exact inner maximization of the penalized DRO
// problem; the printed reformulation is this value divided by lambda.
inline CompositionalProblem build_kl_dro(const std::vector<ClientDataset>& shards,
                                         double lambda, const LossModel& loss,
                                         double domain_radius = 1.0) {
  detail::check_dro_inputs(shards, lambda);
  const int d = static_cast<int>(shards.front().features.front().size());

  CompositionalProblem p;
  p.kind = "kl_dro";
  p.dim_x = d;
  p.dim_g = 1;

  for (const auto& shard : shards) {
    ClientOracle c = detail::zero_h_client(d);
    const int n = static_cast<int>(shard.size());
    c.n_g = n;
    c.g_sample = [shard, loss, lambda](const Vec& x, SampleToken i) {
      return Vec{std::exp(loss.value(x, shard.features[i], shard.labels[i]) / lambda)};
    };
    c.jac_g_sample = [shard, loss, lambda, d](const Vec& x, SampleToken i) {
      const double e = std::exp(loss.value(x, shard.features[i], shard.labels[i]) / lambda);
      const Vec gl = loss.grad(x, shard.features[i], shard.labels[i]);
      Mat j(1, d);
      for (int t = 0; t < d; ++t) j(0, t) = e / lambda * gl[t];
      return j;
    };
    c.g = [c, n](const Vec& x) {
      Vec s(1, 0.0);
      for (int i = 0; i < n; ++i) s[0] += c.g_sample(x, i)[0];
      s[0] /= n;
      return s;
    };
    c.jac_g = [c, n, d](const Vec& x) {
      Mat j(1, d);
      for (int i = 0; i < n; ++i) {
        const Mat ji = c.jac_g_sample(x, i);
        for (int t = 0; t < d; ++t) j(0, t) += ji(0, t) / n;
      }
      return j;
    };
    p.clients.push_back(std::move(c));
  }

  p.outer.value = [lambda](const Vec& y) { return lambda * std::log(y[0]); };
  p.outer.grad = [lambda](const Vec& y) { return Vec{lambda / y[0]}; };

  const auto b = detail::loss_bounds(shards, loss, domain_radius);
  const double e_max = std::exp(b.value / lambda);
  const double y_min = std::exp(-b.value / lambda);
  p.constants.B_g = e_max / lambda * b.grad;
  p.constants.L_g = e_max / lambda * (b.grad * b.grad / lambda + b.smooth);
  p.constants.B_f = lambda / y_min;
  p.constants.L_f = lambda / (y_min * y_min);
  p.constants.sigma_g = std::max(e_max, 2.0 * p.constants.B_g);
  p.constants.delta_g = 2.0 * p.constants.B_g;
  return p;
}

enum class Chi2Variant {
  Printed,           // h = -(1/2 lambda) mean ell^2, f(y) = y^2 / (2 lambda)
  OracleConsistent,  // h = mean(ell + ell^2/(2 lambda)), f(y) = -y^2 / (2 lambda)
};

// Chi^2-regularized DRO with g_k(x) = local mean loss.  The printed form
// evaluates to -Var(ell)/(2 lambda); the oracle-consistent variant equals the
// brute-force inner maximization, mean(ell) + Var(ell)/(2 lambda), when the
// maximizer is interior.
inline CompositionalProblem build_chi2_dro(const std::vector<ClientDataset>& shards,
                                           double lambda, const LossModel& loss,
                                           Chi2Variant variant = Chi2Variant::Printed,
                                           double domain_radius = 1.0) {
  detail::check_dro_inputs(shards, lambda);
  const int d = static_cast<int>(shards.front().features.front().size());
  const bool printed = (variant == Chi2Variant::Printed);

  CompositionalProblem p;
  p.kind = printed ? "chi2_dro" : "chi2_dro_oracle";
  p.dim_x = d;
  p.dim_g = 1;

  for (const auto& shard : shards) {
    ClientOracle c;
    const int n = static_cast<int>(shard.size());
    c.n_h = n;
    c.n_g = n;
    auto ell = [shard, loss](const Vec& x, SampleToken i) {
      return loss.value(x, shard.features[i], shard.labels[i]);
    };
    auto ell_grad = [shard, loss](const Vec& x, SampleToken i) {
      return loss.grad(x, shard.features[i], shard.labels[i]);
    };

    c.g_sample = [ell](const Vec& x, SampleToken i) { return Vec{ell(x, i)}; };
    c.jac_g_sample = [ell_grad, d](const Vec& x, SampleToken i) {
      const Vec gl = ell_grad(x, i);
      Mat j(1, d);
      for (int t = 0; t < d; ++t) j(0, t) = gl[t];
      return j;
    };
    if (printed) {
      c.h_sample = [ell, lambda](const Vec& x, SampleToken i) {
        const double v = ell(x, i);
        return -v * v / (2.0 * lambda);
      };
      c.grad_h_sample = [ell, ell_grad, lambda](const Vec& x, SampleToken i) {
        Vec g = ell_grad(x, i);
        scale(g, -ell(x, i) / lambda);
        return g;
      };
    } else {
      c.h_sample = [ell, lambda](const Vec& x, SampleToken i) {
        const double v = ell(x, i);
        return v + v * v / (2.0 * lambda);
      };
      c.grad_h_sample = [ell, ell_grad, lambda](const Vec& x, SampleToken i) {
        Vec g = ell_grad(x, i);
        scale(g, 1.0 + ell(x, i) / lambda);
        return g;
      };
    }
    c.h = [c, n](const Vec& x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += c.h_sample(x, i);
      return s / n;
    };
    c.grad_h = [c, n, d](const Vec& x) {
      Vec s(d, 0.0);
      for (int i = 0; i < n; ++i) axpy(1.0 / n, c.grad_h_sample(x, i), s);
      return s;
    };
    c.g = [c, n](const Vec& x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += c.g_sample(x, i)[0];
      return Vec{s / n};
    };
    c.jac_g = [c, n, d](const Vec& x) {
      Mat j(1, d);
      for (int i = 0; i < n; ++i) {
        const Mat ji = c.jac_g_sample(x, i);
        for (int t = 0; t < d; ++t) j(0, t) += ji(0, t) / n;
      }
      return j;
    };
    p.clients.push_back(std::move(c));
  }

  const double sgn = printed ? 1.0 : -1.0;
  p.outer.value = [lambda, sgn](const Vec& y) { return sgn * y[0] * y[0] / (2.0 * lambda); };
  p.outer.grad = [lambda, sgn](const Vec& y) { return Vec{sgn * y[0] / lambda}; };

  const auto b = detail::loss_bounds(shards, loss, domain_radius);
  p.constants.B_g = b.grad;
  p.constants.L_g = b.smooth;
  p.constants.B_f = b.value / lambda;
  p.constants.L_f = 1.0 / lambda;
  p.constants.L_h =
      (b.grad * b.grad + b.value * b.smooth) / lambda + (printed ? 0.0 : b.smooth);
  p.constants.sigma_g = std::max(b.value, 2.0 * b.grad);
  p.constants.delta_g = 2.0 * b.grad;
  p.constants.sigma_h = 2.0 * b.value * b.grad / lambda + (printed ? 0.0 : b.grad);
  p.constants.delta_h = p.constants.sigma_h;
  return p;
}

// ---------------------------------------------------------------------------
// Heterogeneous quadratic test problem with optional sampling noise:
// h_k(x) = 0.5 ||x - c_k||^2, g_k(x) = a_k'x + b_k, f(y) = sqrt(y^2 + 4).
// Sampling adds token-seeded additive Gaussian noise (variance sigma^2).
// ---------------------------------------------------------------------------
struct QuadraticSpec {
  int dim = 2;
  int clients = 4;
  double sigma_h = 0.0;
  double sigma_g = 0.0;
  double hetero = 1.0;  // spread of client centers / inner-map slopes
  bool compositional = true;
  std::uint64_t seed = 0;
};

namespace detail {

inline Vec token_noise(SampleToken token, std::uint64_t tag, int dim, double sigma) {
  Vec n(dim, 0.0);
  if (sigma == 0.0) return n;
  RngStream rng(splitmix64(token ^ splitmix64(tag)));
  std::normal_distribution<double> nd(0.0, sigma / std::sqrt(static_cast<double>(dim)));
  for (int i = 0; i < dim; ++i) n[i] = nd(rng);
  return n;
}

}  // namespace detail

inline CompositionalProblem build_hetero_quadratic(const QuadraticSpec& spec) {
  if (spec.dim < 1 || spec.clients < 1)
    throw std::invalid_argument("build_hetero_quadratic: bad dimensions");
  const int d = spec.dim;
  const int K = spec.clients;

  CompositionalProblem p;
  p.kind = spec.compositional ? "hetero_quadratic" : "quadratic_h_only";
  p.dim_x = d;
  p.dim_g = 1;

  RngStream rng = master_stream(spec.seed ^ 0x71ad5cULL);
  std::normal_distribution<double> nd(0.0, 1.0);

  std::vector<Vec> centers(K, Vec(d, 0.0));
  std::vector<Vec> slopes(K, Vec(d, 0.0));
  std::vector<double> offsets(K, 0.0);
  Vec base_slope(d, 0.0);
  for (int i = 0; i < d; ++i) base_slope[i] = nd(rng) / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < d; ++i) {
      centers[k][i] = spec.hetero * nd(rng) / std::sqrt(static_cast<double>(d));
      slopes[k][i] =
          base_slope[i] + spec.hetero * nd(rng) / std::sqrt(static_cast<double>(d));
    }
    offsets[k] = nd(rng);
  }

  for (int k = 0; k < K; ++k) {
    ClientOracle c;
    const Vec ck = centers[k];
    const Vec ak = spec.compositional ? slopes[k] : Vec(d, 0.0);
    const double bk = spec.compositional ? offsets[k] : 0.0;
    const double sh = spec.sigma_h, sg = spec.sigma_g;
    c.n_h = (sh > 0.0) ? 0 : 1;
    c.n_g = (sg > 0.0) ? 0 : 1;
    c.h = [ck](const Vec& x) { return 0.5 * norm_sq(sub(x, ck)); };
    c.grad_h = [ck](const Vec& x) { return sub(x, ck); };
    c.g = [ak, bk](const Vec& x) { return Vec{dot(ak, x) + bk}; };
    c.jac_g = [ak, d](const Vec&) {
      Mat j(1, d);
      for (int i = 0; i < d; ++i) j(0, i) = ak[i];
      return j;
    };
    c.h_sample = [c](const Vec& x, SampleToken) { return c.h(x); };
    c.grad_h_sample = [c, sh, d](const Vec& x, SampleToken tok) {
      Vec g = c.grad_h(x);
      axpy(1.0, detail::token_noise(tok, 1, d, sh), g);
      return g;
    };
    c.g_sample = [c, sg](const Vec& x, SampleToken tok) {
      Vec g = c.g(x);
      g[0] += detail::token_noise(tok, 2, 1, sg)[0];
      return g;
    };
    c.jac_g_sample = [c, sg, d](const Vec& x, SampleToken tok) {
      Mat j = c.jac_g(x);
      const Vec n = detail::token_noise(tok, 3, d, sg);
      for (int i = 0; i < d; ++i) j(0, i) += n[i];
      return j;
    };
    p.clients.push_back(std::move(c));
  }

  if (spec.compositional) {
    p.outer.value = [](const Vec& y) { return std::sqrt(y[0] * y[0] + 4.0); };
    p.outer.grad = [](const Vec& y) { return Vec{y[0] / std::sqrt(y[0] * y[0] + 4.0)}; };
  } else {
    p.outer.value = [](const Vec&) { return 0.0; };
    p.outer.grad = [](const Vec&) { return Vec{0.0}; };
    p.outer.constant = true;
  }

  // Declared constants from the construction
  Vec mean_c(d, 0.0), mean_a(d, 0.0);
  for (int k = 0; k < K; ++k) {
    axpy(1.0 / K, centers[k], mean_c);
    axpy(1.0 / K, slopes[k], mean_a);
  }
  double max_a = 0.0, dh = 0.0, dg = 0.0;
  for (int k = 0; k < K; ++k) {
    max_a = std::max(max_a, norm(slopes[k]));
    dh = std::max(dh, norm(sub(centers[k], mean_c)));
    dg = std::max(dg, norm(sub(slopes[k], mean_a)));
  }
  p.constants.L_h = 1.0;
  p.constants.B_g = spec.compositional ? max_a : 0.0;
  p.constants.B_f = spec.compositional ? 1.0 : 0.0;
  p.constants.L_f = spec.compositional ? 0.5 : 0.0;
  p.constants.sigma_h = spec.sigma_h;
  p.constants.sigma_g = spec.sigma_g;
  p.constants.delta_h = dh;
  p.constants.delta_g = spec.compositional ? dg : 0.0;
  return p;
}

// ---------------------------------------------------------------------------
// Synthetic imbalanced binary classification data and partitioning
// ---------------------------------------------------------------------------

// Linearly-separable-with-noise binary dataset.  The minority class carries
// imbalance_ratio times the majority count; labels are +1 (majority) / -1.
inline ClientDataset generate_synthetic_logistic(int n_total, int d, double imbalance_ratio,
                                                 std::uint64_t seed) {
  if (n_total < 1 || d < 1) throw std::invalid_argument("generate_synthetic_logistic: bad sizes");
  if (imbalance_ratio <= 0.0 || imbalance_ratio > 1.0)
    throw std::invalid_argument("generate_synthetic_logistic: imbalance_ratio must be in (0,1]");

  const int minority =
      static_cast<int>(std::llround(n_total * imbalance_ratio / (1.0 + imbalance_ratio)));
  const int majority = n_total - minority;

  RngStream rng = master_stream(seed ^ 0x5e7ULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec w(d, 0.0);
  for (int i = 0; i < d; ++i) w[i] = nd(rng);
  const double wn = norm(w);
  for (int i = 0; i < d; ++i) w[i] /= wn;

  ClientDataset data;
  auto emit = [&](double label, int count) {
    for (int s = 0; s < count; ++s) {
      Vec a(d);
      for (int i = 0; i < d; ++i) a[i] = 1.5 * label * w[i] + nd(rng);
      data.features.push_back(std::move(a));
      data.labels.push_back(label);
    }
  };
  emit(+1.0, majority);
  emit(-1.0, minority);

  // deterministic shuffle so shards are not class-sorted by construction
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  ClientDataset shuffled;
  for (int i : order) {
    shuffled.features.push_back(data.features[i]);
    shuffled.labels.push_back(data.labels[i]);
  }
  return shuffled;
}

struct PartitionScheme {
  enum class Kind { UniformShard, LabelSkew } kind = Kind::UniformShard;
  double alpha = 1.0;  // Dirichlet concentration for label skew
};

// Splits a dataset into K disjoint, covering, nonempty shards.  Label skew
// draws per-client class proportions from Dirichlet(alpha); redraws up to 100
// times before giving up on an empty shard.
inline std::vector<ClientDataset> partition_dataset(const ClientDataset& data, int K,
                                                    const PartitionScheme& scheme,
                                                    std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("partition_dataset: empty dataset");
  if (K < 1) throw std::invalid_argument("partition_dataset: K must be >= 1");
  const int n = static_cast<int>(data.size());
  if (n < K) throw std::invalid_argument("partition_dataset: fewer samples than clients");

  auto assemble = [&](const std::vector<int>& owner) {
    std::vector<ClientDataset> shards(K);
    for (int i = 0; i < n; ++i) {
      shards[owner[i]].features.push_back(data.features[i]);
      shards[owner[i]].labels.push_back(data.labels[i]);
    }
    return shards;
  };

  if (scheme.kind == PartitionScheme::Kind::UniformShard) {
    std::vector<int> owner(n);
    // contiguous blocks; sizes differ by at most one
    const int base = n / K, extra = n % K;
    int idx = 0;
    for (int k = 0; k < K; ++k) {
      const int sz = base + (k < extra ? 1 : 0);
      for (int j = 0; j < sz; ++j) owner[idx++] = k;
    }
    return assemble(owner);
  }

  RngStream rng = master_stream(seed ^ 0xd1cULL);
  std::vector<double> classes;
  for (double l : data.labels)
    if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<int> owner(n, 0);
    for (double cls : classes) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i)
        if (data.labels[i] == cls) members.push_back(i);
      // Dirichlet(alpha) proportions via normalized gamma draws
      std::gamma_distribution<double> gd(scheme.alpha, 1.0);
      std::vector<double> prop(K);
      double total = 0.0;
      for (int k = 0; k < K; ++k) total += (prop[k] = gd(rng));
      double cum = 0.0;
      std::size_t start = 0;
      for (int k = 0; k < K; ++k) {
        cum += prop[k] / total;
        const std::size_t end =
            (k == K - 1) ? members.size()
                         : static_cast<std::size_t>(std::llround(cum * members.size()));
        for (std::size_t j = start; j < end && j < members.size(); ++j) owner[members[j]] = k;
        start = std::max(start, end);
      }
    }
    std::vector<int> counts(K, 0);
    for (int o : owner) counts[o]++;
    if (std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; }))
      return assemble(owner);
  }
  throw std::runtime_error("partition_dataset: could not produce nonempty shards after 100 redraws");
}

// Convenience: generate + partition in one call.
inline std::pair<ClientDataset, std::vector<ClientDataset>> build_synthetic_logistic(
    int n_total, int d, double imbalance_ratio, int K, const PartitionScheme& scheme,
    std::uint64_t seed) {
  if (n_total < K) throw std::invalid_argument("build_synthetic_logistic: n_total < K");
  ClientDataset data = generate_synthetic_logistic(n_total, d, imbalance_ratio, seed);
  auto shards = partition_dataset(data, K, scheme, seed);
  return {std::move(data), std::move(shards)};
}

}  // namespace feddro
