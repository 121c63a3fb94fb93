#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pfml/model.hpp"

namespace pfml {

/// x_t = 0.5 x + b x / (1 + x^2) + 8 cos(1.2 t) + q w_t,  y_t = 0.05 x_t^2 + e_t,
/// x = x_{t-1}, w, e ~ N(0, 1), theta = {b, q}, q log-positive, x_0 ~ N(0, 1).
class Example1Model final : public StateSpaceModel {
 public:
  static constexpr double kTrueB = 25.0;
  static constexpr double kTrueQSquared = 0.1;
  static ParamVector true_params();

  std::string name() const override { return "example1"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t param_dim() const override { return 2; }
  std::vector<std::string> param_names() const override { return {"b", "q"}; }
  std::vector<Transform> param_transforms() const override;

  double trans_mean(double b, double x_prev, std::size_t t) const noexcept;

  void init_sample(RngStream& rng, std::span<double> x0) const override;
  void trans_sample(const ParamVector& theta, std::span<const double> x_prev, std::size_t t,
                    RngStream& rng, std::span<double> x_next) const override;
  double trans_logdensity(const ParamVector& theta, std::span<const double> x_next,
                          std::span<const double> x_prev, std::size_t t) const override;
  void obs_sample(const ParamVector& theta, std::span<const double> x, std::size_t t,
                  RngStream& rng, std::span<double> y) const override;
  double obs_logdensity(const ParamVector& theta, std::span<const double> y,
                        std::span<const double> x, std::size_t t) const override;
  void trans_logdensity_batch(const ParamVector& theta, std::size_t t,
                              std::span<const double> x_next, std::span<const double> x_prev,
                              std::span<double> out) const override;
  void obs_logdensity_batch(const ParamVector& theta, std::size_t t, std::span<const double> y,
                            std::span<const double> x, std::span<double> out) const override;
};

/// x_t = x / (a + x^2) + b u_t + w_t,  y_t = x_t + e_t,  x = x_{t-1}, unit
/// Gaussian noise, theta = {a, b}, x_0 ~ N(0, 1). The input u_{1:T} is fixed at
/// construction. Where |a + x^2| < 1e-12 the transition log-density is -inf.
class Example2Model final : public StateSpaceModel {
 public:
  static constexpr double kTrueA = 0.5;
  static constexpr double kTrueB = -2.0;
  static constexpr std::uint64_t kInputStream = 0xE2;
  static constexpr double kPoleGuard = 1e-12;
  static ParamVector true_params();

  /// u_t i.i.d. uniform on [-1, 1] from RngStream(seed, kInputStream).
  static std::vector<double> default_inputs(std::size_t horizon, std::uint64_t seed = 0);

  explicit Example2Model(std::vector<double> inputs);

  const std::vector<double>& inputs() const noexcept { return inputs_; }

  std::string name() const override { return "example2"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t param_dim() const override { return 2; }
  std::vector<std::string> param_names() const override { return {"a", "b"}; }
  std::vector<Transform> param_transforms() const override;
  std::optional<std::vector<double>> input(std::size_t t) const override;

  /// NaN when the pole guard trips.
  double trans_mean(double a, double b, double x_prev, std::size_t t) const;

  void init_sample(RngStream& rng, std::span<double> x0) const override;
  void trans_sample(const ParamVector& theta, std::span<const double> x_prev, std::size_t t,
                    RngStream& rng, std::span<double> x_next) const override;
  double trans_logdensity(const ParamVector& theta, std::span<const double> x_next,
                          std::span<const double> x_prev, std::size_t t) const override;
  void obs_sample(const ParamVector& theta, std::span<const double> x, std::size_t t,
                  RngStream& rng, std::span<double> y) const override;
  double obs_logdensity(const ParamVector& theta, std::span<const double> y,
                        std::span<const double> x, std::size_t t) const override;
  void trans_logdensity_batch(const ParamVector& theta, std::size_t t,
                              std::span<const double> x_next, std::span<const double> x_prev,
                              std::span<double> out) const override;
  void obs_logdensity_batch(const ParamVector& theta, std::size_t t, std::span<const double> y,
                            std::span<const double> x, std::span<double> out) const override;

 private:
  double input_at(std::size_t t) const;
  std::vector<double> inputs_;
};

struct LgssCoefficients {
  double a = 0.8;        ///< state transition
  double c = 1.0;        ///< observation gain
  double sigma_w = 1.0;  ///< process noise stddev
  double sigma_e = 1.0;  ///< observation noise stddev
  double sigma0 = 1.0;   ///< initial state stddev (never unknown)
};

/// Scalar linear-Gaussian model x_t = a x + sigma_w w_t, y_t = c x_t + sigma_e e_t.
/// Any subset of {a, c, sigma_w, sigma_e} can be declared unknown; theta lists
/// them in the declared order, with the stddevs log-positive.
class LgssModel final : public StateSpaceModel {
 public:
  LgssModel(LgssCoefficients base, std::vector<std::string> unknowns);

  const LgssCoefficients& base() const noexcept { return base_; }
  LgssCoefficients resolve(const ParamVector& theta) const;
  ParamVector params_of(const LgssCoefficients& coeffs) const;

  std::string name() const override { return "lgss"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t param_dim() const override { return unknowns_.size(); }
  std::vector<std::string> param_names() const override { return unknowns_; }
  std::vector<Transform> param_transforms() const override;

  void init_sample(RngStream& rng, std::span<double> x0) const override;
  void trans_sample(const ParamVector& theta, std::span<const double> x_prev, std::size_t t,
                    RngStream& rng, std::span<double> x_next) const override;
  double trans_logdensity(const ParamVector& theta, std::span<const double> x_next,
                          std::span<const double> x_prev, std::size_t t) const override;
  void obs_sample(const ParamVector& theta, std::span<const double> x, std::size_t t,
                  RngStream& rng, std::span<double> y) const override;
  double obs_logdensity(const ParamVector& theta, std::span<const double> y,
                        std::span<const double> x, std::size_t t) const override;
  void trans_logdensity_batch(const ParamVector& theta, std::size_t t,
                              std::span<const double> x_next, std::span<const double> x_prev,
                              std::span<double> out) const override;
  void obs_logdensity_batch(const ParamVector& theta, std::size_t t, std::span<const double> y,
                            std::span<const double> x, std::span<double> out) const override;

 private:
  LgssCoefficients base_;
  std::vector<std::string> unknowns_;
};

std::shared_ptr<const Example1Model> make_example1();
std::shared_ptr<const Example2Model> make_example2(std::size_t horizon,
                                                   std::uint64_t input_seed = 0);
std::shared_ptr<const LgssModel> make_lgss(LgssCoefficients coeffs = {},
                                           std::vector<std::string> unknowns = {"a"});

}  // namespace pfml
