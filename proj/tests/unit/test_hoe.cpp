#include <doctest.h>

#include <vector>

#include "uavwet/hoe.hpp"
#include "uavwet/rng.hpp"

using namespace uavwet;

TEST_CASE("hoe_step branches") {
  const double e_exp = 1e-4;
  const double thr = 0.01;

  // Satisfied devices reset to zero regardless of the other inputs.
  CHECK(hoe_step(7, 0.0, 0.0111, e_exp, thr) == 0);
  CHECK(hoe_step(0, 1.0, thr, e_exp, thr) == 0);

  // Enough harvest but still below threshold: decrement with floor 1.
  CHECK(hoe_step(1, e_exp, 0.005, e_exp, thr) == 1);
  CHECK(hoe_step(5, 2.0 * e_exp, 0.005, e_exp, thr) == 4);

  // Too little harvest and below threshold: increment.
  CHECK(hoe_step(3, 0.5 * e_exp, 0.005, e_exp, thr) == 4);
  CHECK(hoe_step(0, 0.0, 0.005, e_exp, thr) == 1);
}

TEST_CASE("hoe_step single-slot change bound") {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const int h_prev = static_cast<int>(rng.uniform_index(50));
    const double e = rng.uniform(0.0, 2e-4);
    const double b = rng.uniform(0.0, 0.02);
    const int h = hoe_step(h_prev, e, b, 1e-4, 0.01);
    if (h != 0) {
      CHECK(std::abs(h - h_prev) <= 1);
    } else {
      CHECK(b >= 0.01);
    }
  }
}

TEST_CASE("hoe never rebounds from zero while batteries only grow") {
  // Batteries are accumulate-only, so once b >= thr the HoE stays 0.
  double b = 0.0095;
  int h = 3;
  bool was_zero = false;
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const double e = rng.uniform(0.0, 3e-4);
    b = std::min(b + e, 0.02);
    h = hoe_step(h, e, b, 1e-4, 0.01);
    if (was_zero) CHECK(h == 0);
    if (h == 0) was_zero = true;
  }
  CHECK(was_zero);
}

TEST_CASE("unsatisfied_set membership") {
  const std::vector<double> none = {0.011, 0.02};
  const std::vector<double> zeros = {0.0, 0.0};
  CHECK(unsatisfied_set(none, zeros, 0.01).empty());

  const std::vector<double> b = {0.009, 0.011};
  CHECK(unsatisfied_set(b, zeros, 0.01) == std::vector<int>{0});

  const std::vector<double> b2 = {0.0095};
  const std::vector<double> e2 = {0.0006};
  CHECK(unsatisfied_set(b2, e2, 0.01).empty());
}

TEST_CASE("h_total over the horizon") {
  SUBCASE("empty final set gives zero") {
    std::vector<std::vector<int>> hist(5, std::vector<int>{2, 3});
    CHECK(h_total(hist, std::vector<int>{}) == 0);
  }

  SUBCASE("constant hunger accumulates") {
    std::vector<std::vector<int>> hist(5, std::vector<int>{2});
    CHECK(h_total(hist, std::vector<int>{0}) == 10);
  }

  SUBCASE("mid-episode hunger of satisfied devices is excluded") {
    // Device 0 was hungry early but ends satisfied; device 1 stays hungry.
    std::vector<std::vector<int>> hist = {{4, 1}, {5, 2}, {0, 3}};
    CHECK(h_total(hist, std::vector<int>{1}) == 6);
  }
}

TEST_CASE("HoeState initialization") {
  const std::vector<double> b = {0.002, 0.011, 0.0099};
  const HoeState s = HoeState::init(b, 0.01, 1e-4);
  CHECK(s.h == std::vector<int>{1, 0, 1});
  CHECK(s.satisfied(1));
  CHECK_FALSE(s.satisfied(0));
}
