#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pfml/errors.hpp"
#include "pfml/models.hpp"
#include "pfml/simulate.hpp"
#include "support/oracles.hpp"

namespace pfml {
namespace {

TEST(Simulate, NoiseFreeRecursionIsExact) {
  const testing::HalvingModel model;
  const auto data = simulate(model, ParamVector{}, 3, RngStream(1, 0));
  ASSERT_TRUE(data.has_trajectory());
  EXPECT_EQ(data.state(0)[0], 1.0);
  EXPECT_EQ(data.state(3)[0], 0.125);
  EXPECT_EQ(data.obs(3)[0], 0.125);
}

TEST(Simulate, Example1HasHundredObservations) {
  const auto model = make_example1();
  const auto data = simulate(*model, Example1Model::true_params(), 100, RngStream(1, 0));
  EXPECT_EQ(data.horizon(), 100u);
  EXPECT_EQ(data.obs_dim(), 1u);
  EXPECT_EQ(data.observations().size(), 100u);
  EXPECT_EQ(data.trajectory().size(), 101u);
  ASSERT_TRUE(data.theta_true.has_value());
  EXPECT_EQ(*data.theta_true, Example1Model::true_params());
  ASSERT_TRUE(data.seed.has_value());
  EXPECT_EQ(data.seed->seed, 1u);
}

TEST(Simulate, SameSeedIsBitIdentical) {
  const auto model = make_example1();
  const auto a = simulate(*model, Example1Model::true_params(), 50, RngStream(8, 3));
  const auto b = simulate(*model, Example1Model::true_params(), 50, RngStream(8, 3));
  EXPECT_EQ(a, b);
  const auto c = simulate(*model, Example1Model::true_params(), 50, RngStream(8, 4));
  EXPECT_NE(a.observations()[0], c.observations()[0]);
}

TEST(Simulate, LgssFirstObservationVarianceMatchesClosedForm) {
  const LgssCoefficients c{0.8, 1.0, 0.7, 0.5, 1.0};
  const auto model = make_lgss(c);
  const auto theta = model->params_of(c);
  const int reps = 10000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double y = simulate(*model, theta, 1, RngStream(5, r)).obs(1)[0];
    s += y;
    s2 += y * y;
  }
  const double var = s2 / reps - (s / reps) * (s / reps);
  const double closed = c.sigma0 * c.sigma0 * c.a * c.a + c.sigma_w * c.sigma_w + c.sigma_e * c.sigma_e;
  EXPECT_NEAR(var / closed, 1.0, 0.05);
}

TEST(Simulate, NonFiniteStateReportsStepAndTheta) {
  const auto model = make_lgss({1e300, 1.0, 1.0, 1.0, 1.0});
  const auto theta = model->params_of(model->base());
  try {
    simulate(*model, theta, 10, RngStream(1, 0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("t="), std::string::npos) << msg;
    EXPECT_NE(msg.find("1e+300"), std::string::npos) << msg;
  }
}

TEST(Simulate, RejectsZeroHorizon) {
  const auto model = make_example1();
  EXPECT_THROW(simulate(*model, Example1Model::true_params(), 0, RngStream(1, 0)), Error);
}

TEST(LogJoint, SingleStepStandardNormalsAtZero) {
  const auto model = make_lgss({1.0, 1.0, 1.0, 1.0, 1.0});
  Dataset data(1, {0.0});
  data.set_trajectory(1, {0.0, 0.0});
  const double expected = 2.0 * std::log(1.0 / std::sqrt(2.0 * std::numbers::pi));
  EXPECT_NEAR(log_joint(*model, model->params_of(model->base()), data), expected, 1e-15);
}

TEST(LogJoint, Example1DecreasesAwayFromTruthOnAverage) {
  const auto model = make_example1();
  const auto truth = Example1Model::true_params();
  const auto far = model->make_params({10.0, 2.0});
  double at_truth = 0.0, at_far = 0.0;
  for (int r = 0; r < 100; ++r) {
    const auto data = simulate(*model, truth, 100, RngStream(21, r));
    const double lt = log_joint(*model, truth, data);
    ASSERT_TRUE(std::isfinite(lt));
    at_truth += lt;
    at_far += log_joint(*model, far, data);
  }
  EXPECT_GT(at_truth / 100, at_far / 100);
}

TEST(LogJoint, RequiresTrajectory) {
  const auto model = make_example1();
  const Dataset data(1, {0.0, 1.0});
  EXPECT_THROW(log_joint(*model, Example1Model::true_params(), data), Error);
}

}  // namespace
}  // namespace pfml
