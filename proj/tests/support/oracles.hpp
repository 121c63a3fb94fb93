#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pfml/dataset.hpp"
#include "pfml/local_likelihood.hpp"
#include "pfml/model.hpp"
#include "pfml/models.hpp"
#include "pfml/numeric.hpp"
#include "pfml/particle_system.hpp"

namespace pfml::testing {

/// log N(y; 0, Sigma) with Sigma the full T x T covariance of y_{1:T} under a
/// scalar linear-Gaussian model, factored by a plain Cholesky. Shares no code
/// with the Kalman recursion.
double dense_lgss_loglik(const LgssCoefficients& c, std::span<const double> y);

struct ProductOfSums {
  double loglik;
  /// max_t |sum_n omega_t^n - 1|
  double max_weight_sum_error;
};

/// log z_hat(theta) assembled as prod_t sum_n omega_t^n(theta) c_t^n(theta), with
///   c_t^n = f_theta(x_t^n | x_{t-1}^{a}) / f_ref(x_t^n | x_{t-1}^{a}) * g_theta(y_t | x_t^n)
/// and omega_t^n built from scalar density calls only (no cached terms, no
/// batch kernels). For kRatioOfSums omega is the printed ratio divided by N.
ProductOfSums product_of_sums(const ParticleSystem& system, const StateSpaceModel& model,
                              const Dataset& data, const ParamVector& theta,
                              AncestorWeighting weighting);

/// Kolmogorov-Smirnov distance between samples and a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic 1% critical value of the one-sample KS statistic.
double ks_critical_1pct(std::size_t n);

/// CDF of exp(logpdf) by trapezoid integration on [lo, hi].
std::function<double(double)> numeric_cdf(const std::function<double(double)>& logpdf,
                                          double lo, double hi, std::size_t points = 200001);

/// Deterministic test model: x_0 = 1, x_t = 0.5 x_{t-1}, y_t = x_t. Densities
/// are degenerate, so only the samplers are meaningful.
class HalvingModel final : public StateSpaceModel {
 public:
  std::string name() const override { return "halving"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t param_dim() const override { return 0; }
  std::vector<std::string> param_names() const override { return {}; }
  std::vector<Transform> param_transforms() const override { return {}; }
  void init_sample(RngStream&, std::span<double> x0) const override { x0[0] = 1.0; }
  void trans_sample(const ParamVector&, std::span<const double> x_prev, std::size_t,
                    RngStream&, std::span<double> x_next) const override {
    x_next[0] = 0.5 * x_prev[0];
  }
  double trans_logdensity(const ParamVector&, std::span<const double>, std::span<const double>,
                          std::size_t) const override {
    return 0.0;
  }
  void obs_sample(const ParamVector&, std::span<const double> x, std::size_t, RngStream&,
                  std::span<double> y) const override {
    y[0] = x[0];
  }
  double obs_logdensity(const ParamVector&, std::span<const double>, std::span<const double>,
                        std::size_t) const override {
    return 0.0;
  }
};

// Observation density that vanishes everywhere from t = 2 on.
class VanishingModel final : public StateSpaceModel {
 public:
  std::string name() const override { return "vanishing"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t param_dim() const override { return 1; }
  std::vector<std::string> param_names() const override { return {"a"}; }
  std::vector<Transform> param_transforms() const override { return {Transform::kUnconstrained}; }
  void init_sample(RngStream& rng, std::span<double> x0) const override { x0[0] = rng.normal(); }
  void trans_sample(const ParamVector& th, std::span<const double> xp, std::size_t, RngStream& rng,
                    std::span<double> xn) const override {
    xn[0] = th[0] * xp[0] + rng.normal();
  }
  double trans_logdensity(const ParamVector& th, std::span<const double> xn,
                          std::span<const double> xp, std::size_t) const override {
    return gaussian_logpdf(xn[0], th[0] * xp[0], 1.0);
  }
  void obs_sample(const ParamVector&, std::span<const double> x, std::size_t, RngStream& rng,
                  std::span<double> y) const override {
    y[0] = x[0] + rng.normal();
  }
  double obs_logdensity(const ParamVector&, std::span<const double> y, std::span<const double> x,
                        std::size_t t) const override {
    return t >= 2 ? -INFINITY : gaussian_logpdf(y[0], x[0], 1.0);
  }
};

}  // namespace pfml::testing
