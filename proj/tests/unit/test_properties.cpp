#include <fmt/core.h>

#include "doctest.h"
#include "properties.hpp"

TEST_CASE("randomized properties") {
  for (const auto& p : fogest::testing::all_properties()) {
    const auto outcome = fogest::testing::run_property(p, 200);
    INFO(fmt::format("{}.{}: {}", p.module, p.name, outcome.first_failure.value_or("")));
    CHECK(outcome.failures == 0);
  }
}
