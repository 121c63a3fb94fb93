#include "pfml/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "pfml/errors.hpp"

namespace pfml {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double to_log_exact(double q) {
  double v = std::log(q);
  for (int i = 0; i < 8; ++i) {
    const double e = std::exp(v);
    if (e == q) return v;
    v = std::nextafter(v, e < q ? std::numeric_limits<double>::infinity() : kNegInf);
  }
  return std::log(q);
}

// Counts evaluations, enforces the budget and rejects NaN.
class Evaluator {
 public:
  Evaluator(const Objective& objective, const ParamVector& init, std::size_t budget)
      : objective_(objective),
        tags_(init.transforms().begin(), init.transforms().end()),
        budget_(budget) {}

  std::size_t used() const noexcept { return used_; }
  bool exhausted() const noexcept { return used_ >= budget_; }

  /// nullopt once the budget is spent.
  std::optional<double> operator()(const ParamVector& theta) {
    if (exhausted()) return std::nullopt;
    ++used_;
    const double v = objective_(theta);
    if (std::isnan(v)) throw Error("maximize: objective returned NaN at " + to_string(theta));
    return v;
  }

  ParamVector natural(std::span<const double> v) const { return from_unconstrained(v, tags_); }

 private:
  const Objective& objective_;
  std::vector<Transform> tags_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

struct Vertex {
  std::vector<double> v;
  ParamVector theta;
  double value;
};

double initial_step(const OptimizerConfig& cfg, std::span<const double> v0, std::size_t i) {
  if (!cfg.initial_step.empty()) return cfg.initial_step[i];
  return std::max(0.1 * std::abs(v0[i]), 0.1);
}

OptResult nelder_mead(const Objective& objective, const ParamVector& init,
                      const OptimizerConfig& cfg, double init_value) {
  const std::size_t d = init.size();
  Evaluator eval(objective, init, cfg.max_evals - 1);
  const std::vector<double> v0 = to_unconstrained(init);

  std::vector<Vertex> simplex;
  simplex.reserve(d + 1);
  simplex.push_back({v0, init, init_value});
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> v = v0;
    v[i] += initial_step(cfg, v0, i);
    ParamVector theta = eval.natural(v);
    const double f = *eval(theta);
    simplex.push_back({std::move(v), std::move(theta), f});
  }

  // Move a candidate in unconstrained space: base + coef * (toward - base).
  auto along = [d](std::span<const double> base, std::span<const double> toward, double coef) {
    std::vector<double> out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = base[i] + coef * (toward[i] - base[i]);
    return out;
  };

  Termination reason = Termination::kMaxEvals;
  bool converged = false;
  for (;;) {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.value > b.value; });
    const Vertex& best = simplex.front();

    double diameter = 0.0;
    for (std::size_t k = 1; k <= d; ++k) {
      for (std::size_t i = 0; i < d; ++i) {
        diameter = std::max(diameter, std::abs(simplex[k].v[i] - best.v[i]));
      }
    }
    if (diameter < cfg.x_tolerance) {
      reason = Termination::kXTolerance;
      converged = true;
      break;
    }
    const double worst_value = simplex.back().value;
    if (std::isfinite(worst_value) && best.value - worst_value < cfg.f_tolerance) {
      reason = Termination::kFTolerance;
      converged = true;
      break;
    }
    if (eval.exhausted()) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t i = 0; i < d; ++i) centroid[i] += simplex[k].v[i];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    Vertex& worst = simplex.back();
    const double second_worst = simplex[d - 1].value;

    auto try_point = [&](std::vector<double> v) -> std::optional<Vertex> {
      ParamVector theta = eval.natural(v);
      const auto f = eval(theta);
      if (!f) return std::nullopt;
      return Vertex{std::move(v), std::move(theta), *f};
    };

    auto reflected = try_point(along(centroid, worst.v, -1.0));
    if (!reflected) break;

    if (reflected->value > best.value) {
      auto expanded = try_point(along(centroid, worst.v, -2.0));
      if (expanded && expanded->value > reflected->value) {
        worst = std::move(*expanded);
      } else {
        worst = std::move(*reflected);
      }
      continue;
    }
    if (reflected->value > second_worst) {
      worst = std::move(*reflected);
      continue;
    }

    bool shrink = false;
    if (reflected->value > worst.value) {
      auto contracted = try_point(along(centroid, reflected->v, 0.5));
      if (!contracted) break;
      if (contracted->value >= reflected->value) {
        worst = std::move(*contracted);
      } else {
        shrink = true;
      }
    } else {
      auto contracted = try_point(along(centroid, worst.v, 0.5));
      if (!contracted) break;
      if (contracted->value > worst.value) {
        worst = std::move(*contracted);
      } else {
        shrink = true;
      }
    }

    if (shrink) {
      const std::vector<double> anchor = simplex.front().v;
      for (std::size_t k = 1; k <= d; ++k) {
        auto moved = try_point(along(anchor, simplex[k].v, 0.5));
        if (!moved) break;
        simplex[k] = std::move(*moved);
      }
    }
  }

  std::stable_sort(simplex.begin(), simplex.end(),
                   [](const Vertex& a, const Vertex& b) { return a.value > b.value; });
  return OptResult{simplex.front().theta, simplex.front().value, eval.used() + 1, converged,
                   reason};
}

OptResult quasi_newton(const Objective& objective, const ParamVector& init,
                       const OptimizerConfig& cfg, double init_value) {
  const std::size_t d = init.size();
  Evaluator eval(objective, init, cfg.max_evals - 1);

  std::vector<double> v = to_unconstrained(init);
  ParamVector theta = init;
  double f = init_value;

  // Central differences; nullopt on budget exhaustion or a non-finite value.
  auto gradient = [&](std::span<const double> at) -> std::optional<std::vector<double>> {
    std::vector<double> g(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(at[i]));
      std::vector<double> plus(at.begin(), at.end()), minus(at.begin(), at.end());
      plus[i] += h;
      minus[i] -= h;
      const auto fp = eval(eval.natural(plus));
      const auto fm = eval(eval.natural(minus));
      if (!fp || !fm || !std::isfinite(*fp) || !std::isfinite(*fm)) return std::nullopt;
      g[i] = (*fp - *fm) / (2.0 * h);
    }
    return g;
  };

  auto inf_norm = [](std::span<const double> x) {
    double m = 0.0;
    for (double e : x) m = std::max(m, std::abs(e));
    return m;
  };

  // Inverse of the negated Hessian, kept positive definite.
  std::vector<double> h_inv(d * d, 0.0);
  auto reset_h = [&](double scale) {
    std::fill(h_inv.begin(), h_inv.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) h_inv[i * d + i] = scale;
  };

  Termination reason = Termination::kMaxEvals;
  bool converged = false;
  auto g = gradient(v);
  if (!g) {
    return OptResult{theta, f, eval.used() + 1, false,
                     eval.exhausted() ? Termination::kMaxEvals : Termination::kLineSearchFailed};
  }
  double step0 = 0.0;
  for (std::size_t i = 0; i < d; ++i) step0 = std::max(step0, initial_step(cfg, v, i));
  reset_h(inf_norm(*g) > 0 ? step0 / inf_norm(*g) : 1.0);

  while (true) {
    if (inf_norm(*g) < cfg.f_tolerance) {
      reason = Termination::kGradientTolerance;
      converged = true;
      break;
    }
    std::vector<double> p(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) p[i] += h_inv[i * d + j] * (*g)[j];
    }
    double slope = std::inner_product(p.begin(), p.end(), g->begin(), 0.0);
    if (!(slope > 0.0)) {
      reset_h(step0 / inf_norm(*g));
      for (std::size_t i = 0; i < d; ++i) p[i] = h_inv[i * d + i] * (*g)[i];
      slope = std::inner_product(p.begin(), p.end(), g->begin(), 0.0);
    }

    double alpha = 1.0;
    std::optional<Vertex> accepted;
    bool out_of_budget = false;
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<double> cand(d);
      for (std::size_t i = 0; i < d; ++i) cand[i] = v[i] + alpha * p[i];
      ParamVector ct = eval.natural(cand);
      const auto fc = eval(ct);
      if (!fc) {
        out_of_budget = true;
        break;
      }
      if (*fc >= f + 1e-4 * alpha * slope) {
        accepted = Vertex{std::move(cand), std::move(ct), *fc};
        break;
      }
      alpha *= 0.5;
    }
    if (out_of_budget) break;
    if (!accepted) {
      reason = Termination::kLineSearchFailed;
      break;
    }

    std::vector<double> s(d);
    for (std::size_t i = 0; i < d; ++i) s[i] = accepted->v[i] - v[i];
    const double improvement = accepted->value - f;
    v = std::move(accepted->v);
    theta = std::move(accepted->theta);
    f = accepted->value;

    if (inf_norm(s) < cfg.x_tolerance) {
      reason = Termination::kXTolerance;
      converged = true;
      break;
    }
    if (improvement < cfg.f_tolerance) {
      reason = Termination::kFTolerance;
      converged = true;
      break;
    }

    auto g_new = gradient(v);
    if (!g_new) {
      reason = eval.exhausted() ? Termination::kMaxEvals : Termination::kLineSearchFailed;
      break;
    }
    // BFGS on -f: y = grad(-f)_new - grad(-f)_old = g - g_new.
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = (*g)[i] - (*g_new)[i];
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    if (sy > 1e-12) {
      std::vector<double> hy(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) hy[i] += h_inv[i * d + j] * y[j];
      }
      const double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          h_inv[i * d + j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
      }
    }
    g = std::move(g_new);
  }

  return OptResult{theta, f, eval.used() + 1, converged, reason};
}

}  // namespace

std::vector<double> to_unconstrained(const ParamVector& theta) {
  std::vector<double> v(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta.transform(i) == Transform::kLogPositive) {
      if (!(theta[i] > 0.0)) {
        throw Error("to_unconstrained: component " + std::to_string(i) +
                    " is tagged log-positive but is not positive");
      }
      v[i] = to_log_exact(theta[i]);
    } else {
      v[i] = theta[i];
    }
  }
  return v;
}

ParamVector from_unconstrained(std::span<const double> v, std::span<const Transform> tags) {
  if (v.size() != tags.size()) throw Error("from_unconstrained: size mismatch");
  std::vector<double> values(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    values[i] = tags[i] == Transform::kLogPositive ? std::exp(v[i]) : v[i];
  }
  return ParamVector(std::move(values), std::vector<Transform>(tags.begin(), tags.end()));
}

std::string_view to_string(OptMethod m) noexcept {
  switch (m) {
    case OptMethod::kSimplex: return "simplex";
    case OptMethod::kQuasiNewtonFd: return "quasi-newton-fd";
  }
  return "unknown";
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::kXTolerance: return "x_tolerance";
    case Termination::kFTolerance: return "f_tolerance";
    case Termination::kGradientTolerance: return "gradient_tolerance";
    case Termination::kMaxEvals: return "max_evals";
    case Termination::kLineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

void OptimizerConfig::validate(std::size_t dim) const {
  if (!(x_tolerance > 0.0) || !(f_tolerance > 0.0)) {
    throw Error("optimizer: tolerances must be positive");
  }
  if (max_evals < dim + 1) {
    throw Error("optimizer: max_evals must be at least d+1 = " + std::to_string(dim + 1));
  }
  if (!initial_step.empty()) {
    if (initial_step.size() != dim) throw Error("optimizer: initial_step has the wrong length");
    for (double s : initial_step) {
      if (!(s > 0.0) || !std::isfinite(s)) throw Error("optimizer: initial steps must be positive");
    }
  }
}

OptResult maximize(const Objective& objective, const ParamVector& theta_init,
                   const OptimizerConfig& cfg) {
  if (theta_init.size() == 0) throw Error("maximize: empty parameter vector");
  theta_init.validate();
  cfg.validate(theta_init.size());
  const double f0 = objective(theta_init);
  if (std::isnan(f0)) throw Error("maximize: objective returned NaN at the initial point");
  if (f0 == kNegInf) {
    throw Error("maximize: objective is -inf at the initial point " + to_string(theta_init));
  }
  switch (cfg.method) {
    case OptMethod::kSimplex: return nelder_mead(objective, theta_init, cfg, f0);
    case OptMethod::kQuasiNewtonFd: return quasi_newton(objective, theta_init, cfg, f0);
  }
  throw Error("maximize: unknown method");
}

}  // namespace pfml
