#include <doctest.h>

#include <cmath>

#include "ukit/errors.h"
#include "ukit/nn/ops.h"
#include "ukit/nn/rng.h"
#include "ukit/nn/tape.h"
#include "ukit/nn/tensor.h"

using namespace ukit;
using namespace ukit::nn;

TEST_CASE("tensor rejects inconsistent shapes") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5, 0.0)), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{0, 3}), ShapeError);
  const Tensor t = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.at(1, 2) == 6.0);
  const std::vector<std::size_t> pick = {1, 0, 1};
  const Tensor g = t.gather_rows(pick);
  CHECK(g.rows() == 3);
  CHECK(g.at(0, 0) == 4.0);
  CHECK(g.at(1, 0) == 1.0);
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor logits({3, 5});
    for (double& v : logits.values()) v = 20.0 * rng.normal();
    const double temperature = 0.25 + 4.0 * rng.uniform();
    const Tensor p = softmax_rows(logits, temperature);
    for (std::size_t r = 0; r < 3; ++r) {
      double s = 0.0;
      for (double v : p.row(r)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("argmax picks the first maximum") {
  const Tensor logits = Tensor::from_rows({{0, 2, 2}, {-1, -3, -2}});
  CHECK(argmax_rows(logits) == std::vector<int>{1, 0});
}

TEST_CASE("square at three has derivative six") {
  Tape tape;
  Var w = tape.variable(Tensor::scalar(3.0));
  Var loss = mul(w, w);
  CHECK_THROWS_AS(tape.grad(w), StateError);
  tape.backward(loss);
  CHECK(tape.grad(w)[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward requires a scalar loss") {
  Tape tape;
  Var v = tape.variable(Tensor::vector({1.0, 2.0}));
  CHECK_THROWS_AS(tape.backward(v), ShapeError);
}

TEST_CASE("gradients accumulate over shared inputs") {
  Tape tape;
  Var a = tape.variable(Tensor::vector({1.0, -2.0}));
  Var loss = sum(add(mul(a, a), scale(a, 3.0)));
  tape.backward(loss);
  CHECK(tape.grad(a)[0] == doctest::Approx(5.0));
  CHECK(tape.grad(a)[1] == doctest::Approx(-1.0));
}

TEST_CASE("kl of identical logits is zero") {
  const Tensor z = Tensor::from_rows({{0.3, -1.2, 2.0}, {5.0, 5.0, -5.0}});
  CHECK(kl_loss(z, z) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(kl_loss(z, z, 3.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("kl of a one-hot against uniform matches direct summation") {
  // Teacher [1000, 0] gives p = [1, 0] in double precision; the student
  // gives q = [0.5, 0.5].
  const Tensor one_hot = Tensor::from_rows({{1000.0, 0.0}});
  const Tensor uniform = Tensor::from_rows({{0.0, 0.0}});
  const double forward_kl = kl_loss(uniform, one_hot);
  CHECK(std::isfinite(forward_kl));
  CHECK(forward_kl == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // The other direction needs the clamp: 0.5 * log(0.5) + 0.5 * (log 0.5 - log 1e-12).
  const double reverse_kl = kl_loss(one_hot, uniform);
  const double expected = 0.5 * (std::log(0.5) - std::log(1.0)) +
                          0.5 * (std::log(0.5) - std::log(1e-12));
  CHECK(std::isfinite(reverse_kl));
  CHECK(reverse_kl > 0.0);
  CHECK(reverse_kl == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kl temperature divides logits before the softmax") {
  const Tensor s = Tensor::from_rows({{1.0, 2.0, -1.0}});
  const Tensor t = Tensor::from_rows({{0.5, -0.5, 3.0}});
  const Tensor s_half = Tensor::from_rows({{0.5, 1.0, -0.5}});
  const Tensor t_half = Tensor::from_rows({{0.25, -0.25, 1.5}});
  CHECK(kl_loss(s, t, 2.0) == doctest::Approx(kl_loss(s_half, t_half, 1.0)).epsilon(1e-14));
  // Direct summation of the temperature-2 distributions.
  auto softmax = [](std::vector<double> z) {
    double total = 0.0;
    for (double& v : z) total += v = std::exp(v);
    for (double& v : z) v /= total;
    return z;
  };
  const auto p = softmax({0.25, -0.25, 1.5});
  const auto q = softmax({0.5, 1.0, -0.5});
  double expected = 0.0;
  for (int k = 0; k < 3; ++k) expected += p[k] * std::log(p[k] / q[k]);
  CHECK(kl_loss(s, t, 2.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kl is positive for different distributions") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor a({2, 4}), b({2, 4});
    for (double& v : a.values()) v = 3.0 * rng.normal();
    for (double& v : b.values()) v = 3.0 * rng.normal();
    CHECK(kl_loss(a, b) > 0.0);
  }
}

TEST_CASE("kl rejects non-finite logits and bad temperatures") {
  const Tensor good = Tensor::from_rows({{0.0, 1.0}});
  const Tensor bad = Tensor::from_rows({{NAN, 1.0}});
  CHECK_THROWS_AS(kl_loss(bad, good), NumericError);
  CHECK_THROWS_AS(kl_loss(good, bad), NumericError);
  CHECK_THROWS_AS(kl_loss(good, good, 0.0), ConfigError);
  const Tensor wide = Tensor::from_rows({{0.0, 1.0, 2.0}});
  CHECK_THROWS_AS(kl_loss(good, wide), ShapeError);
}

TEST_CASE("representation distance is the mean squared row distance") {
  const Tensor a = Tensor::from_rows({{0, 0}, {1, 1}});
  const Tensor b = Tensor::from_rows({{3, 4}, {1, 1}});
  CHECK(representation_distance(a, b) == doctest::Approx(12.5));
}

TEST_CASE("cross entropy clamps vanishing probabilities") {
  const Tensor logits = Tensor::from_rows({{0.0, 2000.0}});
  const std::vector<int> labels = {0};
  const auto values = cross_entropy_values(logits, labels);
  CHECK(values[0] == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a = Rng::stream(3, "x"), b = Rng::stream(3, "x"), c = Rng::stream(3, "y");
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differs = differs || va != c.next_u64();
  }
  CHECK(differs);
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.below(7) < 7);
  }
}
