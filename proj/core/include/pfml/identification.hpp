#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfml/dataset.hpp"
#include "pfml/local_likelihood.hpp"
#include "pfml/model.hpp"
#include "pfml/optimizer.hpp"

namespace pfml {

struct IdentifyConfig {
  std::size_t iterations = 50;  ///< K
  std::size_t num_particles = 100;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  /// Base stream; iteration k runs its particle filter on split(k).
  std::uint64_t stream = 0;
  AncestorWeighting weighting = AncestorWeighting::kSelfNormalized;
  /// Optional diagnostic grid evaluated on every iteration's surface.
  std::vector<ParamVector> diagnostic_grid;
};

struct SgdConfig {
  std::size_t steps = 100;
  std::size_t num_particles = 100;
  double gamma0 = 0.01;
  double alpha = 0.6;
  /// Central-difference step in unconstrained space.
  double fd_step = 1e-4;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  /// Stop once this many particle-step density evaluations are spent (0: no cap).
  std::uint64_t density_budget = 0;
  /// An iterate with a natural-space component beyond this is divergence.
  double divergence_bound = 1e6;
};

struct IterationRecord {
  std::size_t k = 0;
  SeedInfo system_seed;
  double online_loglik = 0.0;  ///< bootstrap estimate at theta_{k-1}
  double start_value = 0.0;    ///< surface at theta_{k-1}
  double value = 0.0;          ///< surface at theta_k
  std::size_t evals_used = 0;
  bool converged = false;
  Termination termination = Termination::kMaxEvals;
  bool skipped = false;  ///< SGD: non-finite gradient, no step taken
  double wall_ms = 0.0;
  std::vector<double> grid_values;
};

struct IterationTrace {
  std::string method;  ///< "proposed" or "sgd"
  std::vector<ParamVector> thetas;
  std::vector<IterationRecord> iterations;
  std::optional<IdentifyConfig> identify_config;
  std::optional<SgdConfig> sgd_config;
  bool aborted = false;
  bool diverged = false;
  std::string diagnostic;
  /// Particle-step density evaluations spent (filter runs + surface evaluations).
  std::uint64_t density_evals = 0;
};

/// Iterated maximization: for k = 1..K freeze a bootstrap filter at theta_{k-1},
/// maximize the local likelihood surface from theta_{k-1}, and take the argmax
/// as theta_k. A weight degeneracy at k = 1 throws; later ones abort with the
/// partial trace and a diagnostic.
IterationTrace identify(ModelPtr model, const Dataset& data, const ParamVector& theta0,
                        const IdentifyConfig& cfg);

struct Histogram {
  std::vector<double> edges;  ///< bins + 1 edges
  std::vector<std::size_t> counts;
  std::size_t mode_bin = 0;
  double mode_center = 0.0;
};

/// Equal-width histogram over [min, max]; the mode is the highest-count bin,
/// ties broken by the larger (left + self + right) count, then lower index.
Histogram mode_histogram(std::span<const double> samples, std::size_t bins);

struct EstimateSummary {
  ParamVector theta_hat;
  std::size_t burn_in = 0;
  std::vector<Histogram> histograms;  ///< one per component
  std::size_t samples_used = 0;
};

/// Pools theta_k for k > burn_in over all traces and takes the per-component
/// histogram mode.
EstimateSummary extract_estimate(std::span<const IterationTrace> traces, std::size_t burn_in,
                                 std::size_t bins = 50);

/// Produces the deterministic local objective used at SGD step k.
using LocalObjectiveFactory =
    std::function<Objective(std::size_t k, const ParamVector& theta_prev)>;

/// Robbins-Monro ascent: theta_k = theta_{k-1} + gamma0 / k^alpha * grad, with the
/// gradient taken by central differences of the step's local objective in
/// unconstrained space.
IterationTrace sgd_ascent(const LocalObjectiveFactory& factory, const ParamVector& theta0,
                          const SgdConfig& cfg);

/// SGD baseline over frozen-filter surfaces.
IterationTrace sgd_identify(ModelPtr model, const Dataset& data, const ParamVector& theta0,
                            const SgdConfig& cfg);

}  // namespace pfml
