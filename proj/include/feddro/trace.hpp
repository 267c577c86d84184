#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "feddro/problem.hpp"

namespace feddro {

// Client -> server uploads and server -> client broadcasts, in vector units
// (one count per client per shared d- or d_g-vector).
struct CommCounters {
  std::int64_t highdim_up = 0;
  std::int64_t lowdim_up = 0;
  std::int64_t highdim_down = 0;
  std::int64_t lowdim_down = 0;
  std::int64_t samples_consumed = 0;
};

struct TraceRow {
  int t = 0;
  int round = 0;
  double grad_norm_sq = 0.0;  // ||grad Phi(xbar_t)||^2, exact
  double drift = 0.0;         // (1/K) sum ||x_k - xbar||^2
  double embed_bias = 0.0;    // ||ybar - g(xbar)||^2
  CommCounters comm;
};

using RunTrace = std::vector<TraceRow>;

// Exact full-information metric row at the instantaneous client mean.
inline TraceRow record_metrics(const CompositionalProblem& problem,
                               const std::vector<Vec>& client_x, int t, int round,
                               const std::optional<Vec>& ybar, const CommCounters& comm) {
  const int K = static_cast<int>(client_x.size());
  Vec xbar(problem.dim_x, 0.0);
  for (const Vec& x : client_x) axpy(1.0 / K, x, xbar);

  TraceRow row;
  row.t = t;
  row.round = round;
  row.grad_norm_sq = norm_sq(eval_true_grad_phi(problem, xbar));
  double drift = 0.0;
  for (const Vec& x : client_x) drift += norm_sq(sub(x, xbar));
  row.drift = drift / K;
  if (ybar) row.embed_bias = norm_sq(sub(*ybar, eval_true_g(problem, xbar)));
  row.comm = comm;
  return row;
}

}  // namespace feddro
