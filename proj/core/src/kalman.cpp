#include "pfml/kalman.hpp"

#include <cmath>

#include "pfml/errors.hpp"
#include "pfml/numeric.hpp"

namespace pfml {

double kalman_loglik(const LgssCoefficients& c, std::span<const double> y) {
  if (!(c.sigma_w > 0.0) || !(c.sigma_e > 0.0) || !(c.sigma0 > 0.0)) {
    throw Error("kalman_loglik: standard deviations must be positive");
  }
  const double q = c.sigma_w * c.sigma_w;
  const double r = c.sigma_e * c.sigma_e;
  double mean = 0.0;
  double var = c.sigma0 * c.sigma0;
  double loglik = 0.0;
  for (double yt : y) {
    // predict
    mean = c.a * mean;
    var = c.a * c.a * var + q;
    // innovation
    const double s = c.c * c.c * var + r;
    const double e = yt - c.c * mean;
    loglik += -kLogSqrt2Pi - 0.5 * std::log(s) - 0.5 * e * e / s;
    // update
    const double gain = var * c.c / s;
    mean += gain * e;
    var = (1.0 - gain * c.c) * var;
  }
  return loglik;
}

double kalman_loglik(const LgssModel& model, const ParamVector& theta, const Dataset& data) {
  if (data.obs_dim() != 1) throw Error("kalman_loglik: scalar observations required");
  return kalman_loglik(model.resolve(theta), data.observations());
}

}  // namespace pfml
