#include "pfml/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfml/errors.hpp"
#include "pfml/numeric.hpp"

namespace pfml {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double gaussian_from_const(double log_const, double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return log_const - 0.5 * z * z;
}

inline double log_normal_const(double stddev) { return -kLogSqrt2Pi - std::log(stddev); }

}  // namespace

// ---------------------------------------------------------------------------
// Example 1

ParamVector Example1Model::true_params() {
  return ParamVector({kTrueB, std::sqrt(kTrueQSquared)},
                     {Transform::kUnconstrained, Transform::kLogPositive});
}

std::vector<Transform> Example1Model::param_transforms() const {
  return {Transform::kUnconstrained, Transform::kLogPositive};
}

double Example1Model::trans_mean(double b, double x_prev, std::size_t t) const noexcept {
  const double drift = 8.0 * std::cos(1.2 * static_cast<double>(t));
  return 0.5 * x_prev + b * x_prev / (1.0 + x_prev * x_prev) + drift;
}

void Example1Model::init_sample(RngStream& rng, std::span<double> x0) const {
  x0[0] = rng.normal();
}

void Example1Model::trans_sample(const ParamVector& theta, std::span<const double> x_prev,
                                 std::size_t t, RngStream& rng, std::span<double> x_next) const {
  x_next[0] = trans_mean(theta[0], x_prev[0], t) + theta[1] * rng.normal();
}

double Example1Model::trans_logdensity(const ParamVector& theta, std::span<const double> x_next,
                                       std::span<const double> x_prev, std::size_t t) const {
  return gaussian_from_const(log_normal_const(theta[1]), x_next[0],
                             trans_mean(theta[0], x_prev[0], t), theta[1]);
}

void Example1Model::obs_sample(const ParamVector&, std::span<const double> x, std::size_t,
                               RngStream& rng, std::span<double> y) const {
  y[0] = 0.05 * x[0] * x[0] + rng.normal();
}

double Example1Model::obs_logdensity(const ParamVector&, std::span<const double> y,
                                     std::span<const double> x, std::size_t) const {
  return gaussian_from_const(-kLogSqrt2Pi, y[0], 0.05 * x[0] * x[0], 1.0);
}

void Example1Model::trans_logdensity_batch(const ParamVector& theta, std::size_t t,
                                           std::span<const double> x_next,
                                           std::span<const double> x_prev,
                                           std::span<double> out) const {
  const double b = theta[0];
  const double q = theta[1];
  const double c = log_normal_const(q);
  const double drift = 8.0 * std::cos(1.2 * static_cast<double>(t));
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double xp = x_prev[n];
    const double mean = 0.5 * xp + b * xp / (1.0 + xp * xp) + drift;
    out[n] = gaussian_from_const(c, x_next[n], mean, q);
  }
}

void Example1Model::obs_logdensity_batch(const ParamVector&, std::size_t,
                                         std::span<const double> y, std::span<const double> x,
                                         std::span<double> out) const {
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = gaussian_from_const(-kLogSqrt2Pi, y[0], 0.05 * x[n] * x[n], 1.0);
  }
}

// ---------------------------------------------------------------------------
// Example 2

ParamVector Example2Model::true_params() { return ParamVector({kTrueA, kTrueB}); }

std::vector<double> Example2Model::default_inputs(std::size_t horizon, std::uint64_t seed) {
  RngStream rng(seed, kInputStream);
  std::vector<double> u(horizon);
  for (double& v : u) v = rng.uniform(-1.0, 1.0);
  return u;
}

Example2Model::Example2Model(std::vector<double> inputs) : inputs_(std::move(inputs)) {
  if (inputs_.empty()) throw Error("example2: input sequence must not be empty");
}

std::vector<Transform> Example2Model::param_transforms() const {
  return {Transform::kUnconstrained, Transform::kUnconstrained};
}

double Example2Model::input_at(std::size_t t) const {
  if (t < 1 || t > inputs_.size()) {
    throw Error("example2: no input for t=" + std::to_string(t) + " (horizon " +
                std::to_string(inputs_.size()) + ")");
  }
  return inputs_[t - 1];
}

std::optional<std::vector<double>> Example2Model::input(std::size_t t) const {
  return std::vector<double>{input_at(t)};
}

double Example2Model::trans_mean(double a, double b, double x_prev, std::size_t t) const {
  const double den = a + x_prev * x_prev;
  if (std::abs(den) < kPoleGuard) return std::numeric_limits<double>::quiet_NaN();
  return x_prev / den + b * input_at(t);
}

void Example2Model::init_sample(RngStream& rng, std::span<double> x0) const {
  x0[0] = rng.normal();
}

void Example2Model::trans_sample(const ParamVector& theta, std::span<const double> x_prev,
                                 std::size_t t, RngStream& rng, std::span<double> x_next) const {
  x_next[0] = trans_mean(theta[0], theta[1], x_prev[0], t) + rng.normal();
}

double Example2Model::trans_logdensity(const ParamVector& theta, std::span<const double> x_next,
                                       std::span<const double> x_prev, std::size_t t) const {
  const double mean = trans_mean(theta[0], theta[1], x_prev[0], t);
  if (std::isnan(mean)) return kNegInf;
  return gaussian_from_const(-kLogSqrt2Pi, x_next[0], mean, 1.0);
}

void Example2Model::obs_sample(const ParamVector&, std::span<const double> x, std::size_t,
                               RngStream& rng, std::span<double> y) const {
  y[0] = x[0] + rng.normal();
}

double Example2Model::obs_logdensity(const ParamVector&, std::span<const double> y,
                                     std::span<const double> x, std::size_t) const {
  return gaussian_from_const(-kLogSqrt2Pi, y[0], x[0], 1.0);
}

void Example2Model::trans_logdensity_batch(const ParamVector& theta, std::size_t t,
                                           std::span<const double> x_next,
                                           std::span<const double> x_prev,
                                           std::span<double> out) const {
  const double a = theta[0];
  const double bu = theta[1] * input_at(t);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double xp = x_prev[n];
    const double den = a + xp * xp;
    out[n] = std::abs(den) < kPoleGuard
                 ? kNegInf
                 : gaussian_from_const(-kLogSqrt2Pi, x_next[n], xp / den + bu, 1.0);
  }
}

void Example2Model::obs_logdensity_batch(const ParamVector&, std::size_t,
                                         std::span<const double> y, std::span<const double> x,
                                         std::span<double> out) const {
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = gaussian_from_const(-kLogSqrt2Pi, y[0], x[n], 1.0);
  }
}

// ---------------------------------------------------------------------------
// Linear-Gaussian

namespace {

bool is_stddev(const std::string& name) { return name == "sigma_w" || name == "sigma_e"; }

double& coeff_ref(LgssCoefficients& c, const std::string& name) {
  if (name == "a") return c.a;
  if (name == "c") return c.c;
  if (name == "sigma_w") return c.sigma_w;
  if (name == "sigma_e") return c.sigma_e;
  throw Error("lgss: unknown coefficient '" + name + "' (expected a, c, sigma_w or sigma_e)");
}

}  // namespace

LgssModel::LgssModel(LgssCoefficients base, std::vector<std::string> unknowns)
    : base_(base), unknowns_(std::move(unknowns)) {
  if (!(base_.sigma_w > 0.0) || !(base_.sigma_e > 0.0) || !(base_.sigma0 > 0.0)) {
    throw Error("lgss: standard deviations must be positive");
  }
  if (unknowns_.empty()) throw Error("lgss: at least one coefficient must be unknown");
  for (std::size_t i = 0; i < unknowns_.size(); ++i) {
    LgssCoefficients probe;
    coeff_ref(probe, unknowns_[i]);
    if (std::find(unknowns_.begin(), unknowns_.begin() + static_cast<std::ptrdiff_t>(i),
                  unknowns_[i]) != unknowns_.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw Error("lgss: coefficient '" + unknowns_[i] + "' listed twice");
    }
  }
}

std::vector<Transform> LgssModel::param_transforms() const {
  std::vector<Transform> tags;
  for (const auto& u : unknowns_) {
    tags.push_back(is_stddev(u) ? Transform::kLogPositive : Transform::kUnconstrained);
  }
  return tags;
}

LgssCoefficients LgssModel::resolve(const ParamVector& theta) const {
  if (theta.size() != unknowns_.size()) throw Error("lgss: wrong parameter dimension");
  LgssCoefficients c = base_;
  for (std::size_t i = 0; i < unknowns_.size(); ++i) coeff_ref(c, unknowns_[i]) = theta[i];
  return c;
}

ParamVector LgssModel::params_of(const LgssCoefficients& coeffs) const {
  LgssCoefficients c = coeffs;
  std::vector<double> values;
  for (const auto& u : unknowns_) values.push_back(coeff_ref(c, u));
  return ParamVector(std::move(values), param_transforms());
}

void LgssModel::init_sample(RngStream& rng, std::span<double> x0) const {
  x0[0] = base_.sigma0 * rng.normal();
}

void LgssModel::trans_sample(const ParamVector& theta, std::span<const double> x_prev,
                             std::size_t, RngStream& rng, std::span<double> x_next) const {
  const auto c = resolve(theta);
  x_next[0] = c.a * x_prev[0] + c.sigma_w * rng.normal();
}

double LgssModel::trans_logdensity(const ParamVector& theta, std::span<const double> x_next,
                                   std::span<const double> x_prev, std::size_t) const {
  const auto c = resolve(theta);
  return gaussian_from_const(log_normal_const(c.sigma_w), x_next[0], c.a * x_prev[0], c.sigma_w);
}

void LgssModel::obs_sample(const ParamVector& theta, std::span<const double> x, std::size_t,
                           RngStream& rng, std::span<double> y) const {
  const auto c = resolve(theta);
  y[0] = c.c * x[0] + c.sigma_e * rng.normal();
}

double LgssModel::obs_logdensity(const ParamVector& theta, std::span<const double> y,
                                 std::span<const double> x, std::size_t) const {
  const auto c = resolve(theta);
  return gaussian_from_const(log_normal_const(c.sigma_e), y[0], c.c * x[0], c.sigma_e);
}

void LgssModel::trans_logdensity_batch(const ParamVector& theta, std::size_t,
                                       std::span<const double> x_next,
                                       std::span<const double> x_prev,
                                       std::span<double> out) const {
  const auto c = resolve(theta);
  const double k = log_normal_const(c.sigma_w);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = gaussian_from_const(k, x_next[n], c.a * x_prev[n], c.sigma_w);
  }
}

void LgssModel::obs_logdensity_batch(const ParamVector& theta, std::size_t,
                                     std::span<const double> y, std::span<const double> x,
                                     std::span<double> out) const {
  const auto c = resolve(theta);
  const double k = log_normal_const(c.sigma_e);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = gaussian_from_const(k, y[0], c.c * x[n], c.sigma_e);
  }
}

std::shared_ptr<const Example1Model> make_example1() { return std::make_shared<Example1Model>(); }

std::shared_ptr<const Example2Model> make_example2(std::size_t horizon, std::uint64_t input_seed) {
  if (horizon < 1) throw Error("example2: T must be at least 1");
  return std::make_shared<Example2Model>(Example2Model::default_inputs(horizon, input_seed));
}

std::shared_ptr<const LgssModel> make_lgss(LgssCoefficients coeffs,
                                           std::vector<std::string> unknowns) {
  return std::make_shared<LgssModel>(coeffs, std::move(unknowns));
}

}  // namespace pfml
