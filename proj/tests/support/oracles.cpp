#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pfml::testing {

double dense_lgss_loglik(const LgssCoefficients& c, std::span<const double> y) {
  const std::size_t T = y.size();
  // var_x[t] = Var(x_t), t = 0..T
  std::vector<double> var_x(T + 1);
  var_x[0] = c.sigma0 * c.sigma0;
  for (std::size_t t = 1; t <= T; ++t) var_x[t] = c.a * c.a * var_x[t - 1] + c.sigma_w * c.sigma_w;

  // Cov(x_s, x_t) = a^{t-s} Var(x_s) for s <= t.
  std::vector<double> S(T * T);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = i; j < T; ++j) {
      const double cov = std::pow(c.a, static_cast<double>(j - i)) * var_x[i + 1];
      S[i * T + j] = S[j * T + i] = c.c * c.c * cov;
    }
    S[i * T + i] += c.sigma_e * c.sigma_e;
  }

  std::vector<double> L(T * T, 0.0);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = S[i * T + j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i * T + k] * L[j * T + k];
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("dense_lgss_loglik: covariance not positive definite");
        L[i * T + i] = std::sqrt(s);
      } else {
        L[i * T + j] = s / L[j * T + j];
      }
    }
  }
  std::vector<double> z(T);
  double logdet_half = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i * T + k] * z[k];
    z[i] = s / L[i * T + i];
    quad += z[i] * z[i];
    logdet_half += std::log(L[i * T + i]);
  }
  return -0.5 * static_cast<double>(T) * std::log(2.0 * std::numbers::pi) - logdet_half - 0.5 * quad;
}

ProductOfSums product_of_sums(const ParticleSystem& sys, const StateSpaceModel& model,
                              const Dataset& data, const ParamVector& theta,
                              AncestorWeighting weighting) {
  const std::size_t N = sys.num_particles();
  const ParamVector& ref = sys.theta_ref();
  // log w_{t-1}^n, up to a per-step constant that every omega form cancels.
  std::vector<double> log_w_prev(N, 0.0);
  ProductOfSums out{0.0, 0.0};

  for (std::size_t t = 1; t <= sys.horizon(); ++t) {
    const auto a = sys.ancestors(t);
    std::vector<double> log_g_ref_anc(N, 0.0), log_w_anc(N), log_c(N);
    for (std::size_t n = 0; n < N; ++n) {
      const auto x_anc = sys.particle(t - 1, a[n]);
      const auto x = sys.particle(t, n);
      if (t > 1) log_g_ref_anc[n] = model.obs_logdensity(ref, data.obs(t - 1), x_anc, t - 1);
      log_w_anc[n] = log_w_prev[a[n]];
      log_c[n] = model.trans_logdensity(theta, x, x_anc, t) -
                 model.trans_logdensity(ref, x, x_anc, t) +
                 model.obs_logdensity(theta, data.obs(t), x, t);
    }

    std::vector<double> omega(N);
    if (weighting == AncestorWeighting::kSelfNormalized) {
      double m = -INFINITY;
      for (std::size_t n = 0; n < N; ++n) m = std::max(m, log_w_anc[n] - log_g_ref_anc[n]);
      double total = 0.0;
      for (std::size_t n = 0; n < N; ++n) total += omega[n] = std::exp(log_w_anc[n] - log_g_ref_anc[n] - m);
      for (auto& o : omega) o /= total;
    } else {
      const double mw = *std::max_element(log_w_anc.begin(), log_w_anc.end());
      const double mg = *std::max_element(log_g_ref_anc.begin(), log_g_ref_anc.end());
      double sw = 0.0, sg = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        sw += std::exp(log_w_anc[n] - mw);
        sg += std::exp(log_g_ref_anc[n] - mg);
      }
      for (std::size_t n = 0; n < N; ++n) {
        const double w_share = std::exp(log_w_anc[n] - mw) / sw;
        const double g_share = std::exp(log_g_ref_anc[n] - mg) / sg;
        omega[n] = w_share / g_share / static_cast<double>(N);
      }
    }
    double sum_omega = 0.0;
    for (double o : omega) sum_omega += o;
    out.max_weight_sum_error = std::max(out.max_weight_sum_error, std::abs(sum_omega - 1.0));

    const double mc = *std::max_element(log_c.begin(), log_c.end());
    double z = 0.0;
    for (std::size_t n = 0; n < N; ++n) z += omega[n] * std::exp(log_c[n] - mc);
    out.loglik += std::log(z) + mc;

    // w_t^n = N omega c; the factor N and the shift mc are common to all n.
    for (std::size_t n = 0; n < N; ++n) log_w_prev[n] = std::log(omega[n]) + log_c[n] - mc;
  }
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

std::function<double(double)> numeric_cdf(const std::function<double(double)>& logpdf,
                                          double lo, double hi, std::size_t points) {
  const double h = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> cum(points, 0.0);
  double prev = std::exp(logpdf(lo));
  for (std::size_t i = 1; i < points; ++i) {
    const double cur = std::exp(logpdf(lo + h * static_cast<double>(i)));
    cum[i] = cum[i - 1] + 0.5 * h * (prev + cur);
    prev = cur;
  }
  return [cum = std::move(cum), lo, h, points](double x) {
    if (x <= lo) return 0.0;
    const double pos = (x - lo) / h;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= points) return cum.back();
    const double frac = pos - static_cast<double>(i);
    return cum[i] + frac * (cum[i + 1] - cum[i]);
  };
}

}  // namespace pfml::testing
