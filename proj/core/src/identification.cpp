#include "pfml/identification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "pfml/errors.hpp"
#include "pfml/particle_filter.hpp"

namespace pfml {
namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

IterationTrace identify(ModelPtr model, const Dataset& data, const ParamVector& theta0,
                        const IdentifyConfig& cfg) {
  if (!model) throw Error("identify: null model");
  if (cfg.iterations < 1) throw Error("identify: K must be at least 1");
  if (cfg.num_particles < 1) throw Error("identify: N must be at least 1");
  model->check_params(theta0);
  cfg.optimizer.validate(theta0.size());

  const std::uint64_t cost_per_pass =
      static_cast<std::uint64_t>(data.horizon()) * cfg.num_particles;
  const RngStream base(cfg.seed, cfg.stream);

  IterationTrace trace;
  trace.method = "proposed";
  trace.identify_config = cfg;
  trace.thetas.push_back(theta0);

  for (std::size_t k = 1; k <= cfg.iterations; ++k) {
    const auto started = std::chrono::steady_clock::now();
    const ParamVector& theta_prev = trace.thetas.back();
    const RngStream rng = base.split(k);

    std::shared_ptr<const ParticleSystem> system;
    try {
      system = std::make_shared<const ParticleSystem>(
          run_frozen_bootstrap(*model, theta_prev, cfg.num_particles, data, rng));
    } catch (const Error& e) {
      if (k == 1) {
        throw Error(std::string("identify: particle filter failed at theta0 = ") +
                    to_string(theta_prev) + " (" + e.what() + "); choose a different theta0");
      }
      trace.aborted = true;
      trace.diagnostic = "iteration " + std::to_string(k) + ": particle filter failed at theta = " +
                         to_string(theta_prev) + ": " + e.what();
      break;
    }
    trace.density_evals += cost_per_pass;

    const LocalLikelihoodSurface surface(system, model, data, cfg.weighting);
    std::optional<double> start_value;
    const Objective objective = [&](const ParamVector& theta) {
      const double v = surface.loglik(theta);
      if (!start_value) start_value = v;
      return v;
    };

    IterationRecord rec;
    rec.k = k;
    rec.system_seed = system->seed();
    rec.online_loglik = system->online_loglik();
    try {
      const OptResult res = maximize(objective, theta_prev, cfg.optimizer);
      rec.start_value = *start_value;
      rec.value = res.value;
      rec.evals_used = res.evals_used;
      rec.converged = res.converged;
      rec.termination = res.termination;
      trace.density_evals += cost_per_pass * res.evals_used;
      if (!cfg.diagnostic_grid.empty()) {
        for (const auto& g : cfg.diagnostic_grid) rec.grid_values.push_back(surface.loglik(g));
        trace.density_evals += cost_per_pass * cfg.diagnostic_grid.size();
      }
      rec.wall_ms = elapsed_ms(started);
      trace.iterations.push_back(std::move(rec));
      trace.thetas.push_back(res.argmax);
    } catch (const Error& e) {
      if (k == 1) throw;
      trace.aborted = true;
      trace.diagnostic = "iteration " + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  return trace;
}

Histogram mode_histogram(std::span<const double> samples, std::size_t bins) {
  if (samples.empty()) throw Error("mode_histogram: empty sample pool");
  if (bins < 1) throw Error("mode_histogram: bins must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw Error("mode_histogram: non-finite sample");
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  Histogram h;
  h.edges.resize(bins + 1);
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + static_cast<double>(i) * width;
  h.edges.back() = hi;

  for (double s : samples) {
    std::size_t idx = 0;
    if (width > 0.0) {
      idx = std::min(bins - 1, static_cast<std::size_t>(std::floor((s - lo) / width)));
    }
    ++h.counts[idx];
  }

  auto neighborhood = [&](std::size_t i) {
    std::size_t sum = h.counts[i];
    if (i > 0) sum += h.counts[i - 1];
    if (i + 1 < bins) sum += h.counts[i + 1];
    return sum;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < bins; ++i) {
    if (h.counts[i] > h.counts[best] ||
        (h.counts[i] == h.counts[best] && neighborhood(i) > neighborhood(best))) {
      best = i;
    }
  }
  h.mode_bin = best;
  h.mode_center = 0.5 * (h.edges[best] + h.edges[best + 1]);
  return h;
}

EstimateSummary extract_estimate(std::span<const IterationTrace> traces, std::size_t burn_in,
                                 std::size_t bins) {
  if (traces.empty() || traces.front().thetas.empty()) {
    throw Error("extract_estimate: no traces to pool");
  }
  const ParamVector& shape = traces.front().thetas.front();
  const std::size_t d = shape.size();

  std::vector<std::vector<double>> pooled(d);
  for (const auto& trace : traces) {
    for (std::size_t k = burn_in + 1; k < trace.thetas.size(); ++k) {
      const ParamVector& theta = trace.thetas[k];
      if (theta.size() != d) throw Error("extract_estimate: traces disagree on dimension");
      for (std::size_t i = 0; i < d; ++i) pooled[i].push_back(theta[i]);
    }
  }
  const std::size_t count = pooled.front().size();
  if (count == 0) throw Error("extract_estimate: no samples after burn-in");
  if (count < bins) {
    throw Error("extract_estimate: " + std::to_string(count) +
                " post-burn-in samples is fewer than " + std::to_string(bins) + " bins");
  }

  EstimateSummary summary;
  summary.burn_in = burn_in;
  summary.samples_used = count;
  std::vector<double> hat(d);
  for (std::size_t i = 0; i < d; ++i) {
    summary.histograms.push_back(mode_histogram(pooled[i], bins));
    hat[i] = summary.histograms.back().mode_center;
  }
  summary.theta_hat = shape.with_values(std::move(hat));
  return summary;
}

namespace {

IterationTrace sgd_impl(const LocalObjectiveFactory& factory, const ParamVector& theta0,
                        const SgdConfig& cfg, std::uint64_t cost_per_factory,
                        std::uint64_t cost_per_eval) {
  if (!(cfg.gamma0 > 0.0)) throw Error("sgd: gamma0 must be positive");
  if (!(cfg.alpha > 0.5 && cfg.alpha <= 1.0)) throw Error("sgd: alpha must lie in (0.5, 1]");
  if (!(cfg.fd_step > 0.0)) throw Error("sgd: fd_step must be positive");
  theta0.validate();

  const std::size_t d = theta0.size();
  const std::vector<Transform> tags(theta0.transforms().begin(), theta0.transforms().end());

  IterationTrace trace;
  trace.method = "sgd";
  trace.sgd_config = cfg;
  trace.thetas.push_back(theta0);

  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    if (cfg.density_budget > 0 && trace.density_evals >= cfg.density_budget) break;
    const auto started = std::chrono::steady_clock::now();
    const ParamVector theta = trace.thetas.back();

    Objective objective;
    try {
      objective = factory(k, theta);
    } catch (const Error& e) {
      if (k == 1) throw;
      trace.aborted = true;
      trace.diverged = true;
      trace.diagnostic = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
    trace.density_evals += cost_per_factory;

    IterationRecord rec;
    rec.k = k;
    rec.evals_used = 2 * d + 1;
    trace.density_evals += cost_per_eval * rec.evals_used;

    const std::vector<double> v = to_unconstrained(theta);
    std::vector<double> grad(d);
    bool finite = true;
    try {
      rec.start_value = objective(theta);
      for (std::size_t i = 0; i < d && finite; ++i) {
        std::vector<double> plus = v, minus = v;
        plus[i] += cfg.fd_step;
        minus[i] -= cfg.fd_step;
        const double fp = objective(from_unconstrained(plus, tags));
        const double fm = objective(from_unconstrained(minus, tags));
        grad[i] = (fp - fm) / (2.0 * cfg.fd_step);
        finite = std::isfinite(grad[i]);
      }
    } catch (const Error&) {
      finite = false;
    }
    rec.value = rec.start_value;

    if (!finite) {
      rec.skipped = true;
      rec.wall_ms = elapsed_ms(started);
      trace.iterations.push_back(std::move(rec));
      trace.thetas.push_back(theta);
      continue;
    }

    const double gamma = cfg.gamma0 / std::pow(static_cast<double>(k), cfg.alpha);
    std::vector<double> v_new(d);
    for (std::size_t i = 0; i < d; ++i) v_new[i] = v[i] + gamma * grad[i];
    ParamVector next = from_unconstrained(v_new, tags);
    bool out_of_bounds = !next.is_valid();
    for (std::size_t i = 0; i < d; ++i) {
      out_of_bounds = out_of_bounds || !(std::abs(next[i]) <= cfg.divergence_bound);
    }
    rec.converged = false;
    rec.wall_ms = elapsed_ms(started);
    trace.iterations.push_back(std::move(rec));
    if (out_of_bounds) {
      trace.diverged = true;
      trace.diagnostic = "step " + std::to_string(k) + ": iterate left the bounded region at " +
                         to_string(next);
      break;
    }
    trace.thetas.push_back(std::move(next));
  }
  return trace;
}

}  // namespace

IterationTrace sgd_ascent(const LocalObjectiveFactory& factory, const ParamVector& theta0,
                          const SgdConfig& cfg) {
  return sgd_impl(factory, theta0, cfg, 0, 1);
}

IterationTrace sgd_identify(ModelPtr model, const Dataset& data, const ParamVector& theta0,
                            const SgdConfig& cfg) {
  if (!model) throw Error("sgd_identify: null model");
  if (cfg.num_particles < 1) throw Error("sgd_identify: N must be at least 1");
  model->check_params(theta0);
  const RngStream base(cfg.seed, cfg.stream);
  const std::uint64_t cost = static_cast<std::uint64_t>(data.horizon()) * cfg.num_particles;

  const LocalObjectiveFactory factory = [&](std::size_t k, const ParamVector& theta_prev) {
    auto system = std::make_shared<const ParticleSystem>(
        run_frozen_bootstrap(*model, theta_prev, cfg.num_particles, data, base.split(k)));
    auto surface = std::make_shared<const LocalLikelihoodSurface>(system, model, data);
    return Objective([surface](const ParamVector& theta) { return surface->loglik(theta); });
  };
  return sgd_impl(factory, theta0, cfg, cost, cost);
}

}  // namespace pfml
