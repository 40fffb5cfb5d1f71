#include <doctest.h>

#include <cmath>

#include "../support/oracles.h"
#include "ukit/errors.h"
#include "ukit/nn/model.h"
#include "ukit/nn/ops.h"
#include "ukit/nn/rng.h"

using namespace ukit;
using namespace ukit::nn;

TEST_CASE("zero-weight model gives zero logits and a uniform softmax") {
  Model m(3, {LinearLayer{3, 4, 0}, ActivationLayer{Activation::kRelu}, LinearLayer{4, 5, 0}});
  const Tensor x = Tensor::from_rows({{1.0, -2.0, 0.5}, {7.0, 0.0, 3.0}});
  const Tensor logits = m.predict(x);
  for (double v : logits.values()) CHECK(v == 0.0);
  const Tensor p = softmax_rows(logits);
  for (double v : p.values()) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("identity layer passes the input through") {
  Model m(2, {LinearLayer{2, 2, 0}});
  m.set_params({1, 0, 0, 1, 0, 0});
  const Tensor logits = m.predict(Tensor::from_rows({{1.0, 2.0}}));
  CHECK(logits.values()[0] == 1.0);
  CHECK(logits.values()[1] == 2.0);
}

TEST_CASE("two-layer forward matches a dense matmul oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = Model::mlp({2, {4}, 3, Activation::kTanh}, seed);
    Rng rng(seed + 100);
    Tensor x({3, 2});
    for (double& v : x.values()) v = rng.normal();
    const auto expected = oracle::forward(m, oracle::to_matrix(x));
    const Tensor logits = m.predict(x);
    const Tensor features = m.features(x);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(logits.at(r, c) == doctest::Approx(expected.logits[r][c]).epsilon(1e-13));
      }
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(features.at(r, c) == doctest::Approx(expected.features[r][c]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("tape forward agrees with the plain forward") {
  const Model m = Model::mlp({3, {5, 4}, 3, Activation::kRelu}, 9);
  Rng rng(2);
  Tensor x({6, 3});
  for (double& v : x.values()) v = rng.normal();
  ModelPass pass(m);
  const auto out = pass.forward(x);
  CHECK(out.logits.value() == m.predict(x));
  CHECK(out.features.value() == m.features(x));
}

TEST_CASE("forward rejects a wrong input width") {
  const Model m = Model::mlp({3, {4}, 2, Activation::kRelu}, 0);
  CHECK_THROWS_AS(m.predict(Tensor::from_rows({{1.0, 2.0}})), ShapeError);
  ModelPass pass(m);
  CHECK_THROWS_AS(pass.forward(Tensor::from_rows({{1.0, 2.0}})), ShapeError);
}

TEST_CASE("backward before forward is a state error") {
  const Model m = Model::mlp({2, {3}, 2, Activation::kRelu}, 0);
  ModelPass pass(m);
  Var loose = pass.constant(Tensor::scalar(1.0));
  CHECK_THROWS_AS(pass.backward(loose), StateError);
}

TEST_CASE("uniform softmax with balanced labels gives zero final-bias gradient") {
  Model m(2, {LinearLayer{2, 3, 0}, ActivationLayer{Activation::kRelu}, LinearLayer{3, 3, 0}});
  auto p = m.params();
  for (std::size_t i = 0; i < m.linear(0).param_count(); ++i) p[i] = 0.1 * static_cast<double>(i);
  const Tensor x = Tensor::from_rows({{1, 2}, {-1, 0.5}, {0.3, 0.3}});
  const std::vector<int> labels = {0, 1, 2};
  ModelPass pass(m);
  auto out = pass.forward(x);
  const auto grad = pass.backward(cross_entropy(out.logits, labels));
  const auto& last = m.linear(2);
  for (std::size_t o = 0; o < last.out; ++o) {
    CHECK(grad[last.offset + last.weight_count() + o] == doctest::Approx(0.0).epsilon(1e-15));
  }
  CHECK(grad.size() == m.param_count());
}

TEST_CASE("parameter count equals the sum of layer counts") {
  const Model m = Model::mlp({5, {7, 3}, 4, Activation::kRelu}, 1);
  CHECK(m.param_count() == (5 * 7 + 7) + (7 * 3 + 3) + (3 * 4 + 4));
  CHECK(m.num_classes() == 4);
}

TEST_CASE("initialization is a pure function of the seed") {
  const MlpSpec spec{4, {8, 8}, 3, Activation::kRelu};
  CHECK(Model::mlp(spec, 3) == Model::mlp(spec, 3));
  CHECK_FALSE(Model::mlp(spec, 3) == Model::mlp(spec, 4));
  const Model m = Model::mlp(spec, 3);
  for (std::size_t li : m.linear_layer_indices()) {
    const auto& lin = m.linear(li);
    const double bound = 1.0 / std::sqrt(static_cast<double>(lin.in));
    for (std::size_t i = 0; i < lin.param_count(); ++i) {
      CHECK(std::abs(m.params()[lin.offset + i]) <= bound);
    }
  }
}
