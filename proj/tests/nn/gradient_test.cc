#include <doctest.h>

#include "../support/gradcheck.h"

using namespace ukit;

TEST_CASE("autodiff matches central finite differences on random configurations") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto config = gradcheck::random_config(seed);
    const auto result = gradcheck::check(config);
    INFO("seed " << seed << ": " << config.description);
    CHECK(result.max_rel_err < gradcheck::kTolerance);
    CHECK(result.frozen_exactly_zero);
    CHECK(result.coordinates > 0);
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("every loss kind is exercised") {
  std::vector<int> seen(static_cast<int>(gradcheck::LossKind::kCount), 0);
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    ++seen[static_cast<int>(gradcheck::random_config(seed).kind)];
  }
  for (int count : seen) CHECK(count > 0);
}
