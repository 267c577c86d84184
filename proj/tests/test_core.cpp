#include "doctest.h"

#include "feddro/linalg.hpp"
#include "feddro/rng.hpp"
#include "feddro/trace.hpp"
#include "feddro/problems.hpp"

using namespace feddro;

TEST_CASE("vector primitives") {
  Vec a{1.0, 2.0, 3.0}, b{4.0, -1.0, 0.5};
  CHECK(dot(a, b) == doctest::Approx(4.0 - 2.0 + 1.5));
  CHECK(norm_sq(a) == doctest::Approx(14.0));
  CHECK(norm(Vec{3.0, 4.0}) == doctest::Approx(5.0));

  Vec y = b;
  axpy(2.0, a, y);
  CHECK(y[0] == doctest::Approx(6.0));
  CHECK(y[2] == doctest::Approx(6.5));

  const Vec d = sub(a, b);
  CHECK(d[1] == doctest::Approx(3.0));
  CHECK_THROWS_AS(check_dim(a, 2, "test"), std::invalid_argument);
}

TEST_CASE("jacobian-transpose product") {
  Mat j(2, 3);  // 2 outputs, 3 inputs
  j(0, 0) = 1.0; j(0, 1) = 2.0; j(0, 2) = 3.0;
  j(1, 0) = -1.0; j(1, 1) = 0.0; j(1, 2) = 1.0;
  const Vec v{2.0, 4.0};
  const Vec out = jac_transpose_mul(j, v);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == doctest::Approx(2.0 - 4.0));
  CHECK(out[1] == doctest::Approx(4.0));
  CHECK(out[2] == doctest::Approx(6.0 + 4.0));
}

TEST_CASE("client streams are deterministic and separated") {
  RngStream a1 = client_stream(42, 0);
  RngStream a2 = client_stream(42, 0);
  RngStream b = client_stream(42, 1);
  RngStream c = client_stream(43, 0);
  CHECK(a1() == a2());
  CHECK(a1() == a2());
  RngStream a3 = client_stream(42, 0);
  bool differs_by_client = false, differs_by_seed = false;
  for (int i = 0; i < 4; ++i) {
    const auto v = a3();
    differs_by_client |= (v != b());
    differs_by_seed |= (v != c());
  }
  CHECK(differs_by_client);
  CHECK(differs_by_seed);
}

TEST_CASE("constants validation") {
  LipschitzConstants c;
  CHECK_NOTHROW(c.validate());
  c.L_f = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("metric rows") {
  const CompositionalProblem counter = build_counterexample();

  SUBCASE("single client has zero drift") {
    const TraceRow r = record_metrics(counter, {Vec{0.5}, Vec{0.5}}, 3, 1, std::nullopt, {});
    CHECK(r.drift == 0.0);
    CHECK(r.grad_norm_sq == doctest::Approx(0.24253562503633297 * 0.24253562503633297));
  }

  SUBCASE("embedding bias against the mean-model value") {
    // two linear inner maps g_1(x) = x, g_2(x) = 2x, h = 0
    CompositionalProblem p;
    p.dim_x = 1;
    p.dim_g = 1;
    auto client = [](double s) {
      ClientOracle c = detail::zero_h_client(1);
      c.g = [s](const Vec& x) { return Vec{s * x[0]}; };
      c.jac_g = [s](const Vec&) { Mat j(1, 1); j(0, 0) = s; return j; };
      detail::make_deterministic(c);
      return c;
    };
    p.clients.push_back(client(1.0));
    p.clients.push_back(client(2.0));
    p.outer.value = [](const Vec& y) { return y[0]; };
    p.outer.grad = [](const Vec&) { return Vec{1.0}; };

    // x_1 = 1, x_2 = 3: xbar = 2, mean g_k(x_k) = 3.5, g(xbar) = 3
    const Vec ybar{3.5};
    const TraceRow r = record_metrics(p, {Vec{1.0}, Vec{3.0}}, 0, 0, ybar, {});
    CHECK(r.embed_bias == doctest::Approx(0.25));
    CHECK(r.drift == doctest::Approx(1.0));
  }
}
