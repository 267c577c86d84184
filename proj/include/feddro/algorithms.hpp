#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "feddro/estimators.hpp"
#include "feddro/problem.hpp"
#include "feddro/rng.hpp"
#include "feddro/trace.hpp"

namespace feddro {

struct ClientState {
  int id = 0;
  Vec x;
  Vec x_prev;  // lags x by exactly one local update
  Vec y;
  RngStream rng;
};

struct HyperParams {
  std::vector<double> eta;   // length T
  std::vector<double> beta;  // length T
  int local_period = 1;      // I
  int horizon = 1;           // T
  BatchSpec batch;
  int clients = 1;  // K

  static HyperParams constant(double eta_val, double beta_val, int I, int T, BatchSpec b,
                              int K) {
    HyperParams hp;
    hp.eta.assign(T, eta_val);
    hp.beta.assign(T, beta_val);
    hp.local_period = I;
    hp.horizon = T;
    hp.batch = b;
    hp.clients = K;
    return hp;
  }

  void validate() const {
    if (horizon < 1 || local_period < 1 || clients < 1)
      throw std::invalid_argument("HyperParams: nonpositive T, I, or K");
    if (static_cast<int>(eta.size()) != horizon || static_cast<int>(beta.size()) != horizon)
      throw std::invalid_argument("HyperParams: schedule length does not match T");
    for (double e : eta)
      if (e < 0.0) throw std::invalid_argument("HyperParams: negative step size");
    for (double b : beta)
      if (b < 0.0 || b > 1.0) throw std::invalid_argument("HyperParams: beta outside [0,1]");
    batch.validate();
  }
};

struct FederatedRunResult {
  RunTrace trace;
  Vec final_xbar;
  std::vector<Vec> xbar_iterates;  // xbar^t for t = 0..T (empty when storage disabled)
  int chosen_index = 0;            // a(T) in {1,...,T}
  Vec chosen_iterate;              // xbar^{a(T)}
  CommCounters comm;
};

struct RunOptions {
  int cadence = 1;            // record a trace row every `cadence` iterations
  bool store_iterates = true;
  bool record_trace = true;
  // Optional per-iteration hook (called at t = 0..T with the instantaneous state).
  std::function<void(int t, const std::vector<ClientState>&, const std::optional<Vec>& ybar,
                     const CommCounters&)>
      on_iteration;
};

// Arithmetic mean with a fixed left-to-right reduction over client ids.
inline Vec aggregate_mean(const std::vector<Vec>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("aggregate_mean: empty input");
  Vec mean(vectors.front().size(), 0.0);
  for (const Vec& v : vectors) {
    if (v.size() != mean.size()) throw std::invalid_argument("aggregate_mean: ragged input");
    axpy(1.0, v, mean);
  }
  scale(mean, 1.0 / vectors.size());
  return mean;
}

enum class FedAvgCase { I, II };

namespace detail {

struct RunLoop {
  const CompositionalProblem& problem;
  const HyperParams& hp;
  const RunOptions& opts;
  std::uint64_t seed;

  std::vector<ClientState> states;
  CommCounters comm;
  FederatedRunResult result;
  int rounds_done = 0;
  int pre_drawn_choice = -1;  // set when iterate storage is disabled
  Vec retained_iterate;

  RunLoop(const CompositionalProblem& p, const HyperParams& h, const Vec& x0,
          const RunOptions& o, std::uint64_t master_seed)
      : problem(p), hp(h), opts(o), seed(master_seed) {
    hp.validate();
    if (p.num_clients() != hp.clients)
      throw std::invalid_argument("run: K does not match problem client count");
    check_dim(x0, static_cast<std::size_t>(p.dim_x), "run: x0");
    states.resize(hp.clients);
    for (int k = 0; k < hp.clients; ++k) {
      states[k].id = k;
      states[k].x = x0;
      states[k].x_prev = x0;
      states[k].y = Vec(p.dim_g, 0.0);
      states[k].rng = client_stream(seed, static_cast<std::uint64_t>(k));
    }
    if (!opts.store_iterates) {
      // Pre-draw a(T); the post-loop draw in finish() consumes the same first
      // value of the master stream, so traces are unaffected either way.
      RngStream master = master_stream(seed);
      pre_drawn_choice =
          1 + static_cast<int>(master() % static_cast<std::uint64_t>(hp.horizon));
    }
  }

  std::vector<Vec> client_xs() const {
    std::vector<Vec> xs;
    xs.reserve(states.size());
    for (const auto& s : states) xs.push_back(s.x);
    return xs;
  }

  Vec xbar() const { return aggregate_mean(client_xs()); }

  void sync_x() {
    const Vec mean = xbar();
    for (auto& s : states) s.x = mean;
    comm.highdim_up += hp.clients;
    comm.highdim_down += hp.clients;
    ++rounds_done;
  }

  bool is_sync(int t) const { return (t + 1) % hp.local_period == 0; }

  void emit(int t, const std::optional<Vec>& ybar) {
    if (opts.store_iterates)
      result.xbar_iterates.push_back(xbar());
    else if (t == pre_drawn_choice)
      retained_iterate = xbar();
    if (opts.on_iteration) opts.on_iteration(t, states, ybar, comm);
    if (opts.record_trace && (t == 0 || t % opts.cadence == 0))
      result.trace.push_back(record_metrics(problem, client_xs(), t, rounds_done, ybar, comm));
  }

  FederatedRunResult finish() {
    // Appended final averaging keeps the reported xbar^T well defined when T
    // is not a multiple of I.
    if (hp.horizon % hp.local_period != 0) sync_x();
    result.final_xbar = xbar();
    result.comm = comm;
    RngStream master = master_stream(seed);
    result.chosen_index =
        1 + static_cast<int>(master() % static_cast<std::uint64_t>(hp.horizon));
    if (opts.store_iterates) {
      result.chosen_iterate = result.xbar_iterates[result.chosen_index];
    } else {
      result.chosen_iterate = retained_iterate;  // captured online at the pre-drawn index
    }
    return std::move(result);
  }
};

}  // namespace detail

// Algorithm 1: deterministic local chain-rule updates with the local embedding
// estimate y_k = g_k(x_k) refreshed after every step.  Case I shares x only at
// sync rounds; Case II additionally refreshes y_k at the averaged model and
// shares the embedding mean.
inline FederatedRunResult run_vanilla_fedavg(const CompositionalProblem& problem,
                                             const HyperParams& hp, FedAvgCase fedavg_case,
                                             const Vec& x0, std::uint64_t seed = 0,
                                             const RunOptions& opts = {}) {
  detail::RunLoop loop(problem, hp, x0, opts, seed);

  auto shared_y = [&]() -> Vec {
    std::vector<Vec> ys;
    for (const auto& s : loop.states) ys.push_back(s.y);
    return aggregate_mean(ys);
  };

  // init: Case I starts from the local estimate, Case II from the broadcast mean
  for (auto& s : loop.states) s.y = problem.clients[s.id].g(s.x);
  if (fedavg_case == FedAvgCase::II) {
    const Vec ybar = shared_y();
    for (auto& s : loop.states) s.y = ybar;
  }

  loop.emit(0, shared_y());
  for (int t = 0; t < hp.horizon; ++t) {
    for (auto& s : loop.states) {
      const ClientOracle& c = problem.clients[s.id];
      Vec grad = c.grad_h(s.x);
      axpy(1.0, jac_transpose_mul(c.jac_g(s.x), problem.outer.grad(s.y)), grad);
      s.x_prev = s.x;
      axpy(-hp.eta[t], grad, s.x);
      s.y = c.g(s.x);
      loop.comm.samples_consumed += 2;  // one exact h-eval + one exact g-eval
    }
    if (loop.is_sync(t)) {
      loop.sync_x();
      if (fedavg_case == FedAvgCase::II) {
        for (auto& s : loop.states) s.y = problem.clients[s.id].g(s.x);
        const Vec ybar = shared_y();
        for (auto& s : loop.states) s.y = ybar;
        loop.comm.lowdim_up += hp.clients;
        loop.comm.lowdim_down += hp.clients;
      }
    }
    loop.emit(t + 1, shared_y());
  }
  return loop.finish();
}

// Theorem-2 variant: the embedding mean ybar = (1/K) sum g_k(x_k) is recomputed
// and broadcast at every iteration; x is still averaged every I iterations.
inline FederatedRunResult run_modified_fedavg(const CompositionalProblem& problem,
                                              const HyperParams& hp, const Vec& x0,
                                              std::uint64_t seed = 0,
                                              const RunOptions& opts = {}) {
  detail::RunLoop loop(problem, hp, x0, opts, seed);

  auto broadcast_y = [&]() {
    std::vector<Vec> ys;
    for (const auto& s : loop.states) ys.push_back(problem.clients[s.id].g(s.x));
    const Vec ybar = aggregate_mean(ys);
    for (auto& s : loop.states) s.y = ybar;
    loop.comm.lowdim_up += hp.clients;
    loop.comm.lowdim_down += hp.clients;
    return ybar;
  };

  Vec ybar(problem.dim_g, 0.0);
  {
    std::vector<Vec> ys;
    for (const auto& s : loop.states) ys.push_back(problem.clients[s.id].g(s.x));
    ybar = aggregate_mean(ys);
  }
  loop.emit(0, ybar);
  for (int t = 0; t < hp.horizon; ++t) {
    ybar = broadcast_y();
    for (auto& s : loop.states) {
      const ClientOracle& c = problem.clients[s.id];
      Vec grad = c.grad_h(s.x);
      axpy(1.0, jac_transpose_mul(c.jac_g(s.x), problem.outer.grad(ybar)), grad);
      s.x_prev = s.x;
      axpy(-hp.eta[t], grad, s.x);
      loop.comm.samples_consumed += 2;
    }
    if (loop.is_sync(t)) loop.sync_x();
    loop.emit(t + 1, ybar);
  }
  return loop.finish();
}

// Algorithm 2: per iteration each client refreshes its embedding estimate with
// the hybrid momentum update (beta forced to 1 at t = 0), the server averages
// and broadcasts ybar, clients take a stochastic chain-rule step, and the model
// is averaged every I iterations.  The g-sample batch drawn for the embedding
// update is reused by the gradient estimate.
inline FederatedRunResult run_feddro(const CompositionalProblem& problem, const HyperParams& hp,
                                     const Vec& x0, std::uint64_t seed = 0,
                                     const RunOptions& opts = {}) {
  detail::RunLoop loop(problem, hp, x0, opts, seed);
  std::vector<std::vector<SampleToken>> g_tokens(hp.clients);

  loop.emit(0, std::nullopt);
  for (int t = 0; t < hp.horizon; ++t) {
    for (auto& s : loop.states) {
      const ClientOracle& c = problem.clients[s.id];
      g_tokens[s.id] = draw_g_batch(c, hp.batch.batch_g, s.rng);
      const double beta = (t == 0) ? 1.0 : hp.beta[t];
      s.y = momentum_embedding_update_tokens(c, s.x, s.x_prev, s.y, beta, g_tokens[s.id]);
    }
    std::vector<Vec> ys;
    for (const auto& s : loop.states) ys.push_back(s.y);
    const Vec ybar = aggregate_mean(ys);
    for (auto& s : loop.states) s.y = ybar;
    loop.comm.lowdim_up += hp.clients;
    loop.comm.lowdim_down += hp.clients;

    for (auto& s : loop.states) {
      const ClientOracle& c = problem.clients[s.id];
      const auto h_tokens = draw_h_batch(c, hp.batch.batch_h, s.rng);
      const Vec grad =
          stochastic_phi_grad_tokens(c, problem.outer, s.x, ybar, h_tokens, g_tokens[s.id]);
      s.x_prev = s.x;
      axpy(-hp.eta[t], grad, s.x);
      loop.comm.samples_consumed +=
          static_cast<std::int64_t>(h_tokens.size() + g_tokens[s.id].size());
    }
    if (loop.is_sync(t)) loop.sync_x();
    loop.emit(t + 1, ybar);
  }
  return loop.finish();
}

// Local-SGD FedAvg baseline on the non-compositional part only.
inline FederatedRunResult run_parallel_sgd(const CompositionalProblem& problem,
                                           const HyperParams& hp, const Vec& x0,
                                           std::uint64_t seed = 0,
                                           const RunOptions& opts = {}) {
  if (!problem.outer.constant)
    throw std::invalid_argument("run_parallel_sgd: problem has a non-constant outer map");
  detail::RunLoop loop(problem, hp, x0, opts, seed);

  loop.emit(0, std::nullopt);
  for (int t = 0; t < hp.horizon; ++t) {
    for (auto& s : loop.states) {
      const ClientOracle& c = problem.clients[s.id];
      const auto h_tokens = draw_h_batch(c, hp.batch.batch_h, s.rng);
      Vec grad(problem.dim_x, 0.0);
      for (SampleToken tok : h_tokens)
        axpy(1.0 / h_tokens.size(), c.grad_h_sample(s.x, tok), grad);
      s.x_prev = s.x;
      axpy(-hp.eta[t], grad, s.x);
      loop.comm.samples_consumed += static_cast<std::int64_t>(h_tokens.size());
    }
    if (loop.is_sync(t)) loop.sync_x();
    loop.emit(t + 1, std::nullopt);
  }
  return loop.finish();
}

}  // namespace feddro
