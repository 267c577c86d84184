#include "doctest.h"

#include <cmath>

#include "feddro/algorithms.hpp"
#include "feddro/oracles.hpp"
#include "feddro/problems.hpp"

using namespace feddro;

namespace {

HyperParams hp_const(double eta, int I, int T, int K, double beta = 1.0, int batch = 1) {
  return HyperParams::constant(eta, beta, I, T, {batch, batch}, K);
}

}  // namespace

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS(hp_const(0.1, 0, 4, 2).validate(), std::invalid_argument);
  CHECK_THROWS_AS(hp_const(-0.1, 1, 4, 2).validate(), std::invalid_argument);
  CHECK_THROWS_AS(hp_const(0.1, 1, 4, 2, 1.5).validate(), std::invalid_argument);
  HyperParams hp = hp_const(0.1, 1, 4, 2);
  hp.eta.pop_back();
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
}

TEST_CASE("server averaging") {
  CHECK(aggregate_mean({Vec{1.0, 2.0}})[1] == 2.0);
  const Vec m = aggregate_mean({Vec{1.0, 0.0}, Vec{0.0, 1.0}});
  CHECK(m[0] == 0.5);
  CHECK(m[1] == 0.5);
  // exact for power-of-two cohort sizes (doubling and halving are lossless)
  const Vec v{0.3, -0.7};
  const Vec same = aggregate_mean({v, v, v, v});
  CHECK(same[0] == v[0]);
  CHECK(same[1] == v[1]);
  CHECK_THROWS_AS(aggregate_mean({}), std::invalid_argument);
  CHECK_THROWS_AS(aggregate_mean({Vec{1.0}, Vec{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("local chain-rule updates") {
  const CompositionalProblem counter = build_counterexample();

  SUBCASE("zero step size freezes the iterates") {
    const auto res = run_vanilla_fedavg(counter, hp_const(0.0, 2, 8, 2), FedAvgCase::I, Vec{0.5});
    for (const Vec& x : res.xbar_iterates) CHECK(x[0] == 0.5);
  }

  SUBCASE("single local step matches the hand-computed values") {
    std::vector<Vec> captured;
    RunOptions opts;
    opts.on_iteration = [&](int t, const std::vector<ClientState>& states,
                            const std::optional<Vec>&, const CommCounters&) {
      if (t == 1)
        for (const auto& s : states) captured.push_back(s.x);
    };
    run_vanilla_fedavg(counter, hp_const(0.04, 2, 1, 2), FedAvgCase::I, Vec{0.5}, 0, opts);
    REQUIRE(captured.size() == 2);
    CHECK(captured[0][0] == doctest::Approx(0.6131370849898476).epsilon(1e-14));
    CHECK(captured[1][0] == doctest::Approx(0.5665640235470275).epsilon(1e-14));
  }

  SUBCASE("sync rounds stay above the starting point for small steps") {
    for (FedAvgCase fc : {FedAvgCase::I, FedAvgCase::II}) {
      const auto res =
          run_vanilla_fedavg(counter, hp_const(0.04, 2, 200, 2), fc, Vec{0.5});
      for (int t = 2; t <= 200; t += 2) CHECK(res.xbar_iterates[t][0] >= 0.5);
    }
  }

  SUBCASE("clients are bitwise equal right after every sync") {
    RunOptions opts;
    bool checked = false;
    opts.on_iteration = [&](int t, const std::vector<ClientState>& states,
                            const std::optional<Vec>&, const CommCounters&) {
      if (t > 0 && t % 2 == 0) {
        CHECK(states[0].x == states[1].x);
        checked = true;
      }
    };
    run_vanilla_fedavg(counter, hp_const(0.03, 2, 10, 2), FedAvgCase::II, Vec{0.5}, 0, opts);
    CHECK(checked);
  }
}

TEST_CASE("per-iteration embedding broadcast") {
  const CompositionalProblem counter = build_counterexample();

  SUBCASE("single client equals centralized descent") {
    QuadraticSpec spec;
    spec.dim = 2;
    spec.clients = 1;
    spec.seed = 21;
    const CompositionalProblem p = build_hetero_quadratic(spec);
    const auto res = run_modified_fedavg(p, hp_const(0.05, 1, 50, 1), Vec{1.0, -1.0});
    const auto ref = centralized_gd_reference(p, 0.05, 50, Vec{1.0, -1.0});
    for (int t = 0; t <= 50; ++t)
      CHECK(norm(sub(res.xbar_iterates[t], ref[t])) <= 1e-12);
  }

  SUBCASE("zero step size is constant") {
    const auto res = run_modified_fedavg(counter, hp_const(0.0, 2, 6, 2), Vec{0.5});
    for (const Vec& x : res.xbar_iterates) CHECK(x[0] == 0.5);
  }

  SUBCASE("the counterexample converges under frequent embedding refreshes") {
    const auto res = run_modified_fedavg(counter, hp_const(0.01, 2, 4000, 2), Vec{0.5});
    CHECK(std::abs(res.final_xbar[0]) <= 0.05);
  }
}

TEST_CASE("momentum-embedding federated runs") {
  const CompositionalProblem counter = build_counterexample();

  SUBCASE("zero step size keeps iterates fixed while the embedding tracks") {
    RunOptions opts;
    opts.on_iteration = [&](int t, const std::vector<ClientState>& states,
                            const std::optional<Vec>& ybar, const CommCounters&) {
      for (const auto& s : states) CHECK(s.x[0] == 0.5);
      if (t > 0) {
        REQUIRE(ybar.has_value());
        // ybar = mean g_k(0.5) = 0.5 under full-information clients
        CHECK((*ybar)[0] == doctest::Approx(0.5));
      }
    };
    run_feddro(counter, hp_const(0.0, 2, 6, 2), Vec{0.5}, 0, opts);
  }

  SUBCASE("communication ledger in vector units") {
    const int T = 24, I = 4, K = 2;
    const auto res = run_feddro(counter, hp_const(0.01, I, T, K), Vec{0.5});
    CHECK(res.comm.lowdim_up == K * T);
    CHECK(res.comm.lowdim_down == K * T);
    CHECK(res.comm.highdim_up == K * (T / I));
    CHECK(res.comm.highdim_down == K * (T / I));
  }

  SUBCASE("a ragged horizon appends one final averaging") {
    const auto res = run_feddro(counter, hp_const(0.01, 4, 26, 2), Vec{0.5});
    CHECK(res.comm.highdim_up == 2 * (26 / 4 + 1));
  }

  SUBCASE("the uniform index draw is reproducible and retained without storage") {
    const auto full = run_feddro(counter, hp_const(0.01, 2, 32, 2), Vec{0.5}, 5);
    CHECK(full.chosen_index >= 1);
    CHECK(full.chosen_index <= 32);
    CHECK(full.chosen_iterate == full.xbar_iterates[full.chosen_index]);

    RunOptions lean;
    lean.store_iterates = false;
    const auto thin = run_feddro(counter, hp_const(0.01, 2, 32, 2), Vec{0.5}, 5, lean);
    CHECK(thin.xbar_iterates.empty());
    CHECK(thin.chosen_index == full.chosen_index);
    CHECK(thin.chosen_iterate == full.chosen_iterate);
  }

  SUBCASE("trace cadence") {
    RunOptions opts;
    opts.cadence = 4;
    const auto res = run_feddro(counter, hp_const(0.01, 2, 10, 2), Vec{0.5}, 0, opts);
    CHECK(res.trace.size() == 10 / 4 + 1);
    // counters never decrease along the trace
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
      CHECK(res.trace[i].comm.lowdim_up >= res.trace[i - 1].comm.lowdim_up);
      CHECK(res.trace[i].comm.samples_consumed >= res.trace[i - 1].comm.samples_consumed);
    }
  }

  SUBCASE("client drift grows with the local-update period (statistical)") {
    QuadraticSpec spec;
    spec.dim = 4;
    spec.clients = 4;
    spec.hetero = 2.0;
    spec.sigma_h = 0.1;
    spec.sigma_g = 0.1;
    const std::vector<int> periods{1, 2, 4, 8};
    int inversions = 0;
    std::vector<double> avg_drift(periods.size(), 0.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      spec.seed = 100 + seed;
      const CompositionalProblem p = build_hetero_quadratic(spec);
      for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto res =
            run_feddro(p, hp_const(0.05, periods[i], 256, 4, 0.5), Vec(4, 1.0), seed);
        double drift = 0.0;
        for (const TraceRow& r : res.trace) drift += r.drift;
        avg_drift[i] += drift / res.trace.size() / 5.0;
      }
    }
    for (std::size_t i = 1; i < periods.size(); ++i)
      if (avg_drift[i] < avg_drift[i - 1]) ++inversions;
    CHECK(avg_drift[0] == doctest::Approx(0.0));  // I = 1 syncs every iteration
    CHECK(inversions <= 1);
  }
}

TEST_CASE("plain local SGD baseline") {
  SUBCASE("rejects compositional problems") {
    const CompositionalProblem counter = build_counterexample();
    CHECK_THROWS_AS(run_parallel_sgd(counter, hp_const(0.1, 1, 4, 2), Vec{0.0}),
                    std::invalid_argument);
  }

  QuadraticSpec spec;
  spec.dim = 2;
  spec.clients = 1;
  spec.hetero = 0.0;  // center at the origin
  spec.compositional = false;
  const CompositionalProblem p = build_hetero_quadratic(spec);

  SUBCASE("one exact step on a centered quadratic") {
    const auto res = run_parallel_sgd(p, hp_const(0.1, 1, 1, 1), Vec{1.0, 0.0});
    CHECK(res.final_xbar[0] == doctest::Approx(0.9));
    CHECK(res.final_xbar[1] == doctest::Approx(0.0));
  }

  SUBCASE("a full-horizon period averages exactly once") {
    QuadraticSpec multi = spec;
    multi.clients = 3;
    const CompositionalProblem q = build_hetero_quadratic(multi);
    const auto res = run_parallel_sgd(q, hp_const(0.1, 8, 8, 3), Vec{1.0, 1.0});
    CHECK(res.comm.highdim_up == 3);  // one sync at t = 7
    CHECK(res.trace.back().round == 1);
  }
}
