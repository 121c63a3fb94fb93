#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pfml/errors.hpp"
#include "pfml/kalman.hpp"
#include "pfml/models.hpp"
#include "pfml/simulate.hpp"
#include "support/oracles.hpp"

namespace pfml {
namespace {

TEST(Kalman, SingleStepPredictiveVariance) {
  const std::vector<double> y{0.0};
  const LgssCoefficients c{1.0, 1.0, 1.0, 1.0, 1.0};
  EXPECT_NEAR(kalman_loglik(c, y), -0.5 * std::log(2.0 * std::numbers::pi * 3.0), 1e-15);
}

TEST(Kalman, ZeroGainDecouplesObservations) {
  const std::vector<double> y{0.3, -1.2, 2.0, 0.0};
  const LgssCoefficients c{0.9, 0.0, 1.3, 0.7, 1.0};
  double expected = 0.0;
  for (double v : y) expected += -0.5 * std::log(2.0 * std::numbers::pi * 0.49) - 0.5 * v * v / 0.49;
  EXPECT_NEAR(kalman_loglik(c, y), expected, 1e-12);
}

TEST(Kalman, AgreesWithDenseCovarianceOracle) {
  RngStream rng(1234, 0);
  for (int r = 0; r < 25; ++r) {
    const LgssCoefficients c{rng.uniform(-0.95, 0.95), rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                             rng.uniform(0.2, 2.0), rng.uniform(0.5, 2.0)};
    const auto model = make_lgss(c, {"a"});
    const auto data = simulate(*model, model->params_of(c), 40, RngStream(r, 1));
    const double k = kalman_loglik(c, data.observations());
    const double d = testing::dense_lgss_loglik(c, data.observations());
    EXPECT_NEAR(k, d, 1e-10 * std::abs(d)) << "instance " << r;
  }
}

TEST(Kalman, ModelOverloadResolvesTheta) {
  const auto model = make_lgss({}, {"a", "sigma_e"});
  const auto data = simulate(*model, model->params_of(model->base()), 20, RngStream(3, 0));
  const auto theta = model->make_params({0.5, 1.5});
  EXPECT_EQ(kalman_loglik(*model, theta, data),
            kalman_loglik(LgssCoefficients{0.5, 1.0, 1.0, 1.5, 1.0}, data.observations()));
}

TEST(Kalman, RejectsNonPositiveStddev) {
  const std::vector<double> y{0.0};
  EXPECT_THROW(kalman_loglik(LgssCoefficients{0.5, 1.0, 0.0, 1.0, 1.0}, y), Error);
  EXPECT_THROW(kalman_loglik(LgssCoefficients{0.5, 1.0, 1.0, -1.0, 1.0}, y), Error);
}

}  // namespace
}  // namespace pfml
