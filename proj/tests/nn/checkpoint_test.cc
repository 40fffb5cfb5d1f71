#include <doctest.h>

#include <filesystem>

#include "ukit/errors.h"
#include "ukit/nn/adapter.h"
#include "ukit/nn/checkpoint.h"
#include "ukit/nn/model.h"

using namespace ukit;
using namespace ukit::nn;

TEST_CASE("checkpoint round trip is bit-exact") {
  Model m = Model::mlp({3, {5, 4}, 3, Activation::kTanh}, 17);
  m = attach_adapter(m, 0, 2, 0.75, 3);
  for (std::size_t i = m.base_param_count(); i < m.param_count(); ++i) m.params()[i] = 0.1 * i + 1e-17;
  Checkpoint cp{m, {}};
  cp.metadata["note"] = "x";
  const std::string text = serialize_checkpoint(cp);
  const Checkpoint back = parse_checkpoint(text);
  CHECK(back.model == m);
  CHECK(back.metadata == cp.metadata);
  CHECK(serialize_checkpoint(back) == text);

  const auto path = std::filesystem::temp_directory_path() / "ukit_checkpoint_test.json";
  save_checkpoint(path, cp);
  CHECK(load_checkpoint(path).model == m);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint errors") {
  CHECK_THROWS_AS(parse_checkpoint("not json"), ConfigError);
  CHECK_THROWS_AS(parse_checkpoint(R"({"format": "other"})"), ConfigError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ukit/model.json"), ResolutionError);
  CHECK_THROWS_AS(activation_from_string("gelu"), ConfigError);
}

TEST_CASE("activation names round trip") {
  for (Activation a : {Activation::kIdentity, Activation::kRelu, Activation::kTanh}) {
    CHECK(activation_from_string(activation_name(a)) == a);
  }
}
