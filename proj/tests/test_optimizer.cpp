#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "pfml/errors.hpp"
#include "pfml/optimizer.hpp"
#include "pfml/rng.hpp"

namespace pfml {
namespace {

constexpr auto kUnc = Transform::kUnconstrained;
constexpr auto kPos = Transform::kLogPositive;

OptimizerConfig tight(std::size_t max_evals = 2000) {
  OptimizerConfig cfg;
  cfg.max_evals = max_evals;
  cfg.x_tolerance = 1e-10;
  cfg.f_tolerance = 1e-20;
  return cfg;
}

double bowl(const ParamVector& p) {
  return -((p[0] - 3.0) * (p[0] - 3.0) + (p[1] + 1.0) * (p[1] + 1.0));
}

double rosenbrock(const ParamVector& p) {
  const double a = 1.0 - p[0], b = p[1] - p[0] * p[0];
  return -(a * a + 100.0 * b * b);
}

TEST(Transforms, IdentityOnUnconstrained) {
  const ParamVector p({-3.5, 2.0});
  EXPECT_EQ(to_unconstrained(p), (std::vector<double>{-3.5, 2.0}));
}

TEST(Transforms, LogOfOneIsZero) {
  const ParamVector p({1.0}, {kPos});
  EXPECT_EQ(to_unconstrained(p)[0], 0.0);
  const std::vector<double> zero{0.0};
  const std::vector<Transform> tags{kPos};
  EXPECT_EQ(from_unconstrained(zero, tags)[0], 1.0);
}

TEST(Transforms, RejectsNonPositive) {
  EXPECT_THROW(to_unconstrained(ParamVector({0.0}, {kPos})), Error);
  EXPECT_THROW(to_unconstrained(ParamVector({-1.0}, {kPos})), Error);
}

TEST(Transforms, RoundTripIsBitExact) {
  RngStream rng(1, 0);
  const std::vector<Transform> tags{kUnc, kPos, kPos};
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> v{rng.uniform(-1e3, 1e3), rng.uniform(-30.0, 30.0), rng.normal()};
    const ParamVector p = from_unconstrained(v, tags);
    ASSERT_EQ(from_unconstrained(to_unconstrained(p), tags), p) << to_string(p);
  }
}

TEST(Maximize, QuadraticBowl) {
  const auto r = maximize(bowl, ParamVector({0.0, 0.0}), tight());
  EXPECT_NEAR(r.argmax[0], 3.0, 1e-6);
  EXPECT_NEAR(r.argmax[1], -1.0, 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(Maximize, LogPositiveOptimumAtE) {
  const Objective f = [](const ParamVector& p) {
    const double u = std::log(p[0]) - 1.0;
    return -u * u;
  };
  const auto r = maximize(f, ParamVector({1.0}, {kPos}), tight());
  EXPECT_NEAR(r.argmax[0], std::numbers::e, 1e-5);
}

TEST(Maximize, Rosenbrock) {
  const auto r = maximize(rosenbrock, ParamVector({-1.2, 1.0}), tight(2000));
  EXPECT_NEAR(r.argmax[0], 1.0, 1e-3);
  EXPECT_NEAR(r.argmax[1], 1.0, 1e-3);
  EXPECT_LE(r.evals_used, 2000u);
}

TEST(Maximize, QuasiNewtonFindsBowl) {
  auto cfg = tight(500);
  cfg.method = OptMethod::kQuasiNewtonFd;
  const auto r = maximize(bowl, ParamVector({0.0, 0.0}), cfg);
  EXPECT_NEAR(r.argmax[0], 3.0, 1e-5);
  EXPECT_NEAR(r.argmax[1], -1.0, 1e-5);
}

TEST(Maximize, ValueMatchesArgmaxAndBudget) {
  OptimizerConfig cfg;
  cfg.max_evals = 37;
  int calls = 0;
  const Objective f = [&](const ParamVector& p) {
    ++calls;
    return rosenbrock(p);
  };
  const auto r = maximize(f, ParamVector({-1.2, 1.0}), cfg);
  EXPECT_EQ(r.value, rosenbrock(r.argmax));
  EXPECT_LE(r.evals_used, 37u);
  EXPECT_EQ(static_cast<std::size_t>(calls), r.evals_used);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.termination, Termination::kMaxEvals);
}

TEST(Maximize, NeverRegressesFromStart) {
  RngStream rng(2, 0);
  for (int i = 0; i < 50; ++i) {
    const ParamVector init({rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)});
    OptimizerConfig cfg;
    cfg.max_evals = 3 + static_cast<std::size_t>(rng.uniform(0.0, 40.0));
    EXPECT_GE(maximize(rosenbrock, init, cfg).value, rosenbrock(init));
  }
}

TEST(Maximize, Deterministic) {
  const auto a = maximize(rosenbrock, ParamVector({-1.2, 1.0}));
  const auto b = maximize(rosenbrock, ParamVector({-1.2, 1.0}));
  EXPECT_EQ(a.argmax, b.argmax);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.evals_used, b.evals_used);
}

TEST(Maximize, ArgmaxInvariantToConstantShift) {
  const Objective shifted = [](const ParamVector& p) { return bowl(p) + 1234.5; };
  auto cfg = tight();
  cfg.x_tolerance = 1e-6;
  const auto a = maximize(bowl, ParamVector({0.0, 0.0}), cfg);
  const auto b = maximize(shifted, ParamVector({0.0, 0.0}), cfg);
  EXPECT_NEAR(a.argmax[0], b.argmax[0], cfg.x_tolerance);
  EXPECT_NEAR(a.argmax[1], b.argmax[1], cfg.x_tolerance);
}

TEST(Maximize, MovesAwayFromNegativeInfinity) {
  // Feasible region is the unit disk around the origin; optimum (0.9, 0) lies inside.
  const Objective f = [](const ParamVector& p) {
    if (p[0] * p[0] + p[1] * p[1] > 1.0) return -std::numeric_limits<double>::infinity();
    return -((p[0] - 0.9) * (p[0] - 0.9) + p[1] * p[1]);
  };
  const auto r = maximize(f, ParamVector({0.0, 0.0}), tight());
  EXPECT_NEAR(r.argmax[0], 0.9, 1e-5);
  EXPECT_NEAR(r.argmax[1], 0.0, 1e-5);
}

TEST(Maximize, RejectsDegenerateStart) {
  const Objective neg_inf = [](const ParamVector&) { return -std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(maximize(neg_inf, ParamVector({0.0})), Error);
  const Objective nan_later = [](const ParamVector& p) { return p[0] == 0.0 ? 0.0 : std::nan(""); };
  EXPECT_THROW(maximize(nan_later, ParamVector({0.0})), Error);
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig cfg;
  cfg.max_evals = 2;
  EXPECT_THROW(cfg.validate(2), Error);
  cfg.max_evals = 3;
  EXPECT_NO_THROW(cfg.validate(2));
  cfg.x_tolerance = 0.0;
  EXPECT_THROW(cfg.validate(2), Error);
}

}  // namespace
}  // namespace pfml
