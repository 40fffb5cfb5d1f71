#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.h"
#include "ukit/curriculum/lambert_w.h"
#include "ukit/curriculum/superloss.h"
#include "ukit/errors.h"
#include "ukit/nn/ops.h"

using namespace ukit;
using namespace ukit::curriculum;

TEST_CASE("lambert w at reference points") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::numbers::e) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lambert_w0(-1.0 / std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(lambert_w0(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-12));
  CHECK(lambert_w0(10.0) == doctest::Approx(1.7455280027406994).epsilon(1e-12));
  CHECK_THROWS_AS(lambert_w0(-1.0), DomainError);
  CHECK_THROWS_AS(lambert_w0(NAN), DomainError);
}

TEST_CASE("lambert w agrees with bisection") {
  for (double x : {-0.36, -0.3, -0.1, -1e-4, 1e-6, 0.3, 2.0, 7.5, 50.0, 1e3, 1e6}) {
    CHECK(lambert_w0(x) == doctest::Approx(oracle::lambert_w0_bisect(x)).epsilon(1e-9));
  }
}

TEST_CASE("lambert w residual is small across the domain") {
  const double lo = -1.0 / std::numbers::e;
  for (int i = 0; i <= 10000; ++i) {
    // Dense near the branch point, then geometric out to 1e6.
    const double x = i < 2000 ? lo + (0.0 - lo) * i / 2000.0 : std::pow(10.0, -6.0 + 12.0 * (i - 2000) / 8000.0);
    const double w = lambert_w0(x);
    CHECK(w >= -1.0);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-10 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("superloss confidence") {
  const SuperLossParams p{1.0, 1.0};
  CHECK(superloss_sigma(1.0, p) == doctest::Approx(1.0));
  // Below the floor the confidence saturates at exp(1).
  CHECK(superloss_sigma(-100.0, p) == doctest::Approx(std::numbers::e).epsilon(1e-6));
  CHECK(superloss_sigma(3.0, p) < 1.0);
  CHECK(superloss_sigma(0.5, p) > 1.0);
  double previous = INFINITY;
  for (double l = -3.0; l <= 20.0; l += 0.01) {
    const double s = superloss_sigma(l, p);
    CHECK(s > 0.0);
    CHECK(s <= previous + 1e-12);
    previous = s;
  }
  CHECK_THROWS_AS(superloss_sigma(1.0, {0.0, 0.0}), ConfigError);
}

TEST_CASE("the confidence minimizes the superloss term above the floor") {
  // (l - tau) / lam >= -2/e for every l here.
  for (double l : {0.6, 1.0, 2.5, 6.0}) {
    const SuperLossParams p{1.0, 0.7};
    const double s = superloss_sigma(l, p);
    const double best = superloss_term(l, s, p);
    for (double f : {0.9, 0.99, 1.01, 1.1}) CHECK(superloss_term(l, s * f, p) >= best - 1e-12);
  }
}

TEST_CASE("disabled reducer is the plain mean") {
  LossReducer r;
  const std::vector<double> values = {1.0, 2.0, 6.0};
  CHECK(r.reduce(values) == doctest::Approx(3.0));
  CHECK_FALSE(r.tau().has_value());
  CHECK_THROWS_AS(r.reduce(std::vector<double>{}), ConfigError);
}

TEST_CASE("enabled reducer tracks tau and down-weights hard samples") {
  LossReducer r({true, 1.0, 0.5});
  nn::Tape tape;
  nn::Var losses = tape.variable(nn::Tensor::vector({0.5, 1.0, 4.5}));
  nn::Var total = r.reduce(losses);
  CHECK(r.tau().value() == doctest::Approx(2.0));
  tape.backward(total);
  const auto& g = tape.grad(losses);
  // Gradient weights are sigma_i / n with tau fixed at the first batch mean.
  const SuperLossParams p{2.0, 1.0};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g[i] == doctest::Approx(superloss_sigma(losses.value()[i], p) / 3.0));
  }
  CHECK(g[0] > g[2]);
  double expected = 0.0;
  for (double l : {0.5, 1.0, 4.5}) expected += superloss_term(l, superloss_sigma(l, p), p) / 3.0;
  CHECK(total.value()[0] == doctest::Approx(expected).epsilon(1e-12));

  const std::vector<double> second = {1.0, 1.0};
  r.reduce(second);
  CHECK(r.tau().value() == doctest::Approx(0.5 * 2.0 + 0.5 * 1.0));
  CHECK_THROWS_AS(LossReducer({true, 0.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(LossReducer({true, 1.0, 1.0}), ConfigError);
}
