#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "feddro/algorithms.hpp"
#include "feddro/problem.hpp"
#include "feddro/problems.hpp"
#include "feddro/rng.hpp"

namespace feddro {

// Central finite differences, one evaluation pair per coordinate.
inline Vec finite_diff_grad(const std::function<double(const Vec&)>& fn, const Vec& x,
                            double h = 1e-6) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: nonpositive step");
  Vec grad(x.size(), 0.0);
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = fn(probe);
    probe[i] = x[i] - h;
    const double down = fn(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::invalid_argument("finite_diff_grad: non-finite evaluation");
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Relative error with a max(1, ||reference||) denominator so near-stationary
// points do not inflate the ratio.
inline double grad_rel_error(const Vec& approx, const Vec& reference) {
  return norm(sub(approx, reference)) / std::max(1.0, norm(reference));
}

enum class Divergence { KL, Chi2 };

struct SimplexPoint {
  std::vector<double> p;

  void validate() const {
    double sum = 0.0;
    for (double v : p) {
      if (v < 0.0) throw std::invalid_argument("SimplexPoint: negative mass");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("SimplexPoint: mass not 1");
  }
};

struct DroMaxResult {
  double value = 0.0;
  SimplexPoint maximizer;
  double kkt_residual = 0.0;  // gradient-mapping norm at the returned point
  int iterations = 0;
};

namespace detail {

// Euclidean projection onto the probability simplex (sort-based).
inline std::vector<double> project_simplex(std::vector<double> v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  int rho = 0;
  for (int i = 0; i < m; ++i) {
    css += u[i];
    const double cand = (css - 1.0) / (i + 1);
    if (u[i] - cand > 0.0) {
      rho = i + 1;
      tau = cand;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - tau);
  return v;
}

}  // namespace detail

// Inner maximization over the simplex: sum p_i l_i - lambda * penalty(p).
// KL has the closed-form softmax solution; the chi^2 quadratic program is
// solved by projected gradient ascent from the uniform start (step 1/(lambda m),
// the concavity modulus) to gradient-mapping norm <= 1e-10.
inline DroMaxResult brute_force_dro_value(const std::vector<double>& losses, double lambda,
                                          Divergence divergence) {
  if (lambda <= 0.0) throw std::invalid_argument("brute_force_dro_value: nonpositive lambda");
  if (losses.empty()) throw std::invalid_argument("brute_force_dro_value: empty losses");
  const int m = static_cast<int>(losses.size());
  DroMaxResult res;

  if (divergence == Divergence::KL) {
    const double lmax = *std::max_element(losses.begin(), losses.end());
    double z = 0.0;
    for (double l : losses) z += std::exp((l - lmax) / lambda);
    res.value = lmax + lambda * std::log(z / m);
    res.maximizer.p.resize(m);
    for (int i = 0; i < m; ++i) res.maximizer.p[i] = std::exp((losses[i] - lmax) / lambda) / z;
    // first-order residual of the softmax stationarity condition
    double resid = 0.0;
    for (int i = 0; i < m; ++i) {
      const double g = losses[i] - lambda * (std::log(res.maximizer.p[i]) + std::log(m));
      resid += res.maximizer.p[i] * g;  // common multiplier; deviations cancel below
    }
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      const double g = losses[i] - lambda * (std::log(res.maximizer.p[i]) + std::log(m));
      worst = std::max(worst, std::abs(g - resid));
    }
    res.kkt_residual = worst;
    res.maximizer.validate();
    return res;
  }

  // chi^2: objective F(p) = sum p_i l_i - (lambda m / 2) sum (p_i - 1/m)^2
  std::vector<double> p(m, 1.0 / m);
  const double step = 1.0 / (lambda * m);
  auto grad_at = [&](const std::vector<double>& q) {
    std::vector<double> g(m);
    for (int i = 0; i < m; ++i) g[i] = losses[i] - lambda * m * (q[i] - 1.0 / m);
    return g;
  };
  const int cap = 100000;
  double map_norm = 0.0;
  int it = 0;
  for (; it < cap; ++it) {
    const std::vector<double> g = grad_at(p);
    std::vector<double> next(m);
    for (int i = 0; i < m; ++i) next[i] = p[i] + step * g[i];
    next = detail::project_simplex(next);
    double diff_sq = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = (next[i] - p[i]) / step;
      diff_sq += d * d;
    }
    p = std::move(next);
    map_norm = std::sqrt(diff_sq);
    if (map_norm <= 1e-10) break;
  }
  res.iterations = it + 1;
  res.kkt_residual = map_norm;
  res.value = 0.0;
  for (int i = 0; i < m; ++i) {
    const double dev = p[i] - 1.0 / m;
    res.value += p[i] * losses[i] - 0.5 * lambda * m * dev * dev;
  }
  res.maximizer.p = std::move(p);
  res.maximizer.validate();
  return res;
}

// Exact-gradient descent on the composed objective; returns x_0..x_T.
inline std::vector<Vec> centralized_gd_reference(const CompositionalProblem& problem, double eta,
                                                 int T, const Vec& x0) {
  check_dim(x0, static_cast<std::size_t>(problem.dim_x), "centralized_gd_reference: x0");
  std::vector<Vec> iterates;
  iterates.reserve(T + 1);
  iterates.push_back(x0);
  Vec x = x0;
  for (int t = 0; t < T; ++t) {
    axpy(-eta, eval_true_grad_phi(problem, x), x);
    iterates.push_back(x);
  }
  return iterates;
}

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;  // the error or gap the check measured
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline Vec random_ball_point(int dim, RngStream& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec x(dim);
  for (double& v : x) v = gauss(rng);
  const double r = std::pow(unif(rng), 1.0 / dim) / std::max(norm(x), 1e-300);
  scale(x, r);
  return x;
}

inline VerifyCheck fd_check(const std::string& label, const CompositionalProblem& problem,
                            RngStream& rng, int points = 20) {
  VerifyCheck c;
  c.name = "gradient_consistency/" + label;
  c.tolerance = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const Vec x = random_ball_point(problem.dim_x, rng);
    const Vec analytic = eval_true_grad_phi(problem, x);
    const Vec fd = finite_diff_grad(
        [&](const Vec& z) { return eval_true_phi(problem, z); }, x, 1e-6);
    worst = std::max(worst, grad_rel_error(fd, analytic));
  }
  c.measured = worst;
  c.pass = worst <= c.tolerance;
  c.detail = std::to_string(points) + " random points in the unit ball";
  return c;
}

}  // namespace detail

// Runs the oracle-backed invariant checks on a standard problem set and
// reports pass/fail with measured errors.
inline VerifyReport verify_suite(std::uint64_t seed = 20240817) {
  VerifyReport report;
  RngStream rng = master_stream(seed);

  // shared small logistic dataset, equal shards across 2 clients
  const ClientDataset data = generate_synthetic_logistic(50, 4, 0.25, seed);
  const auto shards = partition_dataset(data, 2, PartitionScheme{}, seed);
  const double lambda = 1.0;
  const LossModel loss = make_loss("logistic");

  const CompositionalProblem counter = build_counterexample();
  const CompositionalProblem kl = build_kl_dro(shards, lambda, loss);
  const CompositionalProblem chi2_printed =
      build_chi2_dro(shards, lambda, loss, Chi2Variant::Printed);
  const CompositionalProblem chi2_oracle =
      build_chi2_dro(shards, lambda, loss, Chi2Variant::OracleConsistent);

  report.checks.push_back(detail::fd_check("counterexample", counter, rng));
  report.checks.push_back(detail::fd_check("kl_dro", kl, rng));
  report.checks.push_back(detail::fd_check("chi2_printed", chi2_printed, rng));
  report.checks.push_back(detail::fd_check("chi2_oracle_consistent", chi2_oracle, rng));

  // pooled per-sample losses at x (equal shards, so pooling matches the aggregate)
  auto pooled_losses = [&](const Vec& x) {
    std::vector<double> ls;
    for (const auto& shard : shards)
      for (std::size_t i = 0; i < shard.labels.size(); ++i)
        ls.push_back(loss.value(x, shard.features[i], shard.labels[i]));
    return ls;
  };

  {
    VerifyCheck c;
    c.name = "kl_dual_equality";
    c.tolerance = 1e-8;
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Vec x = detail::random_ball_point(kl.dim_x, rng);
      const double reformulated = eval_true_phi(kl, x);
      const double brute = brute_force_dro_value(pooled_losses(x), lambda, Divergence::KL).value;
      worst = std::max(worst, std::abs(reformulated - brute));
    }
    c.measured = worst;
    c.pass = worst <= c.tolerance;
    c.detail = "10 random x, 50-sample logistic problem";
    report.checks.push_back(c);
  }

  {
    // The printed chi^2 form is not the inner max.  Report the measured gap
    // between the two variants and check it matches mean(l) + Var(l)/lambda;
    // also confirm the simplex max never exceeds the hyperplane-relaxed value.
    VerifyCheck c;
    c.name = "chi2_discrepancy_report";
    c.tolerance = 1e-8;
    double worst = 0.0;
    std::string gaps;
    for (int i = 0; i < 5; ++i) {
      const Vec x = detail::random_ball_point(chi2_printed.dim_x, rng);
      const std::vector<double> ls = pooled_losses(x);
      const double mean = std::accumulate(ls.begin(), ls.end(), 0.0) / ls.size();
      double var = 0.0;
      for (double l : ls) var += (l - mean) * (l - mean);
      var /= ls.size();
      const double expected_gap = mean + var / lambda;
      const double printed = eval_true_phi(chi2_printed, x);
      const double oracle = eval_true_phi(chi2_oracle, x);
      const DroMaxResult brute = brute_force_dro_value(ls, lambda, Divergence::Chi2);
      worst = std::max(worst, std::abs((oracle - printed) - expected_gap));
      worst = std::max(worst, std::max(0.0, brute.value - oracle));
      gaps += (i ? "," : "") + std::to_string(oracle - printed);
    }
    c.measured = worst;
    c.pass = worst <= c.tolerance;
    c.detail = "gap (oracle-consistent - printed) per x: " + gaps;
    report.checks.push_back(c);
  }

  {
    VerifyCheck c;
    c.name = "feddro_gd_reduction";
    c.tolerance = 1e-10;
    const int T = 64;
    const double eta = 0.05;
    const Vec x0(1, 0.5);
    HyperParams hp = HyperParams::constant(eta, 1.0, 1, T, {1, 1}, counter.num_clients());
    RunOptions opts;
    opts.record_trace = false;
    const FederatedRunResult run = run_feddro(counter, hp, x0, seed, opts);
    // K=2 deterministic clients with I=1 average the exact per-client gradients,
    // which is exact GD on the aggregate.
    const std::vector<Vec> ref = centralized_gd_reference(counter, eta, T, x0);
    double worst = 0.0;
    for (int t = 0; t <= T; ++t)
      worst = std::max(worst, norm(sub(run.xbar_iterates[t], ref[t])));
    c.measured = worst;
    c.pass = worst <= c.tolerance;
    c.detail = "I=1, full batches, T=64, counterexample";
    report.checks.push_back(c);
  }

  return report;
}

}  // namespace feddro
