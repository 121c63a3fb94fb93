#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "pfml/errors.hpp"
#include "pfml/identification.hpp"
#include "pfml/io.hpp"
#include "pfml/kalman.hpp"
#include "pfml/local_likelihood.hpp"
#include "pfml/models.hpp"
#include "pfml/parallel.hpp"
#include "pfml/particle_filter.hpp"
#include "pfml/simulate.hpp"

namespace pfml::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Stream ids. Every random draw of a run is a function of (seed, stream).
constexpr std::uint64_t kDataStream = 0xDA7A;
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kIdentifyStreamBase = 0x10000;
constexpr std::uint64_t kSgdStreamBase = 0x20000;
constexpr std::uint64_t kSurfaceStreamBase = 0x30000;

struct Context {
  std::string command;
  RunConfig cfg;
  std::uint64_t seed = 1;
  fs::path out;
  std::size_t workers = 0;
};

struct ModelSetup {
  ModelPtr model;
  std::optional<ParamVector> truth;
};

struct Problem {
  ModelSetup setup;
  Dataset data;
  std::string data_source;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ParamVector params_from(const ModelSetup& s, const std::string& key, const std::vector<double>& v) {
  if (v.size() != s.model->param_dim()) {
    throw ConfigError(key + ": " + s.model->name() + " has " + std::to_string(s.model->param_dim()) +
                      " parameters, got " + std::to_string(v.size()));
  }
  ParamVector theta = s.model->make_params(v);
  try {
    s.model->check_params(theta);
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
  return theta;
}

ModelSetup make_model(const RunConfig& cfg, const std::string& name, std::size_t horizon,
                      const std::vector<double>* inputs) {
  if (name == "example1") return {make_example1(), Example1Model::true_params()};
  if (name == "example2") {
    std::shared_ptr<const Example2Model> m;
    if (inputs && !inputs->empty()) {
      m = std::make_shared<const Example2Model>(*inputs);
    } else {
      m = make_example2(horizon, cfg.get_u64("input-seed", 0));
    }
    return {m, Example2Model::true_params()};
  }
  if (name == "lgss") {
    try {
      auto m = make_lgss({}, cfg.get_list("unknowns", {"a"}));
      return {m, m->params_of(m->base())};
    } catch (const Error& e) {
      throw ConfigError(std::string("unknowns: ") + e.what());
    }
  }
  throw ConfigError("model: expected example1, example2 or lgss, got '" + name + "'");
}

std::size_t positive(const RunConfig& cfg, const std::string& key, std::size_t fallback) {
  const std::size_t v = cfg.get_size(key, fallback);
  if (v < 1) throw ConfigError(key + ": must be at least 1");
  return v;
}

/// Loads --data or simulates from the model at --theta (default: true values).
Problem load_problem(const Context& ctx, const std::string& default_model, std::size_t default_T) {
  const RunConfig& cfg = ctx.cfg;
  if (const auto path = cfg.find("data")) {
    LoadedDataset loaded;
    try {
      loaded = read_dataset(*path);
    } catch (const Error& e) {
      throw ConfigError(std::string("data: ") + e.what());
    }
    const std::string name = cfg.get_string("model", loaded.model_name.empty() ? default_model
                                                                               : loaded.model_name);
    Problem p{make_model(cfg, name, loaded.data.horizon(), &loaded.inputs), std::move(loaded.data),
              *path};
    if (p.data.obs_dim() != p.setup.model->obs_dim()) {
      throw ConfigError("data: observation dimension does not match model " + name);
    }
    return p;
  }
  const std::string name = cfg.get_string("model", default_model);
  const std::size_t T = positive(cfg, "T", default_T);
  ModelSetup setup = make_model(cfg, name, T, nullptr);
  ParamVector theta = *setup.truth;
  if (const auto v = cfg.get_doubles("theta")) theta = params_from(setup, "theta", *v);
  Dataset data = simulate(*setup.model, theta, T, RngStream(ctx.seed, kDataStream));
  return {std::move(setup), std::move(data), "simulated"};
}

/// theta_0 for repeat r: --theta0 if given, else uniform on the replication
/// intervals of the shipped examples.
ParamVector initial_theta(const Context& ctx, const ModelSetup& s, std::size_t r) {
  if (const auto v = ctx.cfg.get_doubles("theta0")) return params_from(s, "theta0", *v);
  RngStream rng = RngStream(ctx.seed, kInitStream).split(r);
  const std::string name = s.model->name();
  if (name == "example1") {
    const double b = rng.uniform(10.0, 40.0);
    const double q = 4.0 * (1.0 - rng.uniform());  // (0, 4]
    return s.model->make_params({b, q});
  }
  if (name == "example2") {
    const double a = rng.uniform(0.25, 1.5);
    const double b = rng.uniform(-3.0, -1.0);
    return s.model->make_params({a, b});
  }
  throw ConfigError("theta0: required for model " + name);
}

IdentifyConfig identify_config(const Context& ctx, std::size_t default_K, std::size_t default_N) {
  const RunConfig& cfg = ctx.cfg;
  IdentifyConfig ic;
  ic.iterations = positive(cfg, "K", default_K);
  ic.num_particles = positive(cfg, "N", default_N);
  ic.seed = ctx.seed;
  const std::string method = cfg.get_string("optimizer", "simplex");
  if (method == "simplex") {
    ic.optimizer.method = OptMethod::kSimplex;
  } else if (method == "bfgs") {
    ic.optimizer.method = OptMethod::kQuasiNewtonFd;
  } else {
    throw ConfigError("optimizer: expected simplex or bfgs, got '" + method + "'");
  }
  ic.optimizer.max_evals = cfg.get_size("max-evals", ic.optimizer.max_evals);
  ic.optimizer.x_tolerance = cfg.get_double("x-tol", ic.optimizer.x_tolerance);
  ic.optimizer.f_tolerance = cfg.get_double("f-tol", ic.optimizer.f_tolerance);
  const std::string weighting = cfg.get_string("weighting", "self-normalized");
  if (weighting == "self-normalized") {
    ic.weighting = AncestorWeighting::kSelfNormalized;
  } else if (weighting == "ratio-of-sums") {
    ic.weighting = AncestorWeighting::kRatioOfSums;
  } else {
    throw ConfigError("weighting: expected self-normalized or ratio-of-sums, got '" + weighting + "'");
  }
  return ic;
}

// ---------------------------------------------------------------------------
// Output helpers

/// Run description embedded in every output: command, config and seed.
/// Worker count and output directory are excluded so outputs do not depend on them.
json run_json(const Context& ctx, const json& extra = json::object()) {
  json config = json::object();
  for (const auto& [k, v] : ctx.cfg.entries()) {
    if (k != "workers" && k != "out" && k != "seed") config[k] = v;
  }
  json j{{"tool", "pfml"}, {"command", ctx.command}, {"seed", ctx.seed}, {"config", config}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

std::string csv_preamble(const Context& ctx, const json& extra = json::object()) {
  return "# " + run_json(ctx, extra).dump() + "\n";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

std::string fmt(double v) { return format_double(v); }

void write_dataset_with_run(const Context& ctx, const fs::path& path, const Problem& p) {
  write_dataset(path, p.data, *p.setup.model);
  auto side = path;
  side.replace_extension(".json");
  std::ifstream is(side);
  json meta = json::parse(is);
  is.close();
  meta["run"] = run_json(ctx);
  write_file(side, meta.dump(2) + "\n");
}

void prepare_out(const Context& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  const fs::path probe = ctx.out / ".pfml_write_probe";
  std::ofstream os(probe);
  if (!os) throw ConfigError("out: directory '" + ctx.out.string() + "' is not writable");
  os.close();
  fs::remove(probe, ec);
}

std::vector<std::string> names_of(const ModelSetup& s) { return s.model->param_names(); }

json theta_json(const ParamVector& theta) {
  json arr = json::array();
  for (double v : theta.values()) arr.push_back(fmt(v));
  return arr;
}

// ---------------------------------------------------------------------------
// Repeated identification

struct RepeatOutcome {
  std::optional<IterationTrace> trace;
  ParamVector theta0;
  std::string error;
  double wall_ms = 0.0;
};

std::vector<RepeatOutcome> run_identify_repeats(const Context& ctx, const Problem& p,
                                                const IdentifyConfig& base, std::size_t repeats) {
  std::vector<RepeatOutcome> out(repeats);
  for (std::size_t r = 0; r < repeats; ++r) out[r].theta0 = initial_theta(ctx, p.setup, r);
  std::mutex log_mutex;
  parallel_for(repeats, ctx.workers, [&](std::size_t r) {
    IdentifyConfig ic = base;
    ic.stream = kIdentifyStreamBase + r;
    const auto t0 = Clock::now();
    try {
      out[r].trace = identify(p.setup.model, p.data, out[r].theta0, ic);
    } catch (const Error& e) {
      out[r].error = e.what();
    }
    out[r].wall_ms = ms_since(t0);
    std::lock_guard lock(log_mutex);
    std::cerr << "repeat " << r << (out[r].trace ? " done" : " failed: " + out[r].error) << " ("
              << static_cast<long long>(out[r].wall_ms) << " ms)\n";
  });
  return out;
}

std::size_t completed(const std::vector<RepeatOutcome>& outcomes) {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.trace.has_value(); }));
}

std::string traces_csv(const Context& ctx, const ModelSetup& s,
                       const std::vector<RepeatOutcome>& outcomes) {
  std::ostringstream os;
  os << csv_preamble(ctx);
  os << "repeat,k";
  for (const auto& n : names_of(s)) os << ',' << n;
  os << ",inner_value,online_loglik,evals,converged\n";
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (!outcomes[r].trace) continue;
    const auto& tr = *outcomes[r].trace;
    for (std::size_t k = 0; k < tr.thetas.size(); ++k) {
      os << r << ',' << k;
      for (double v : tr.thetas[k].values()) os << ',' << fmt(v);
      if (k == 0) {
        os << ",,,,\n";
        continue;
      }
      const auto& rec = tr.iterations[k - 1];
      os << ',' << fmt(rec.value) << ',' << fmt(rec.online_loglik) << ',' << rec.evals_used << ','
         << (rec.converged ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

std::vector<IterationTrace> completed_traces(const std::vector<RepeatOutcome>& outcomes) {
  std::vector<IterationTrace> traces;
  for (const auto& o : outcomes) {
    if (o.trace) traces.push_back(*o.trace);
  }
  return traces;
}

json repeats_manifest(const std::vector<RepeatOutcome>& outcomes, std::uint64_t stream_base) {
  json arr = json::array();
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& o = outcomes[r];
    json j{{"repeat", r},
           {"stream", stream_base + r},
           {"theta0", theta_json(o.theta0)},
           {"completed", o.trace.has_value()},
           {"wall_ms", o.wall_ms}};
    if (!o.error.empty()) j["error"] = o.error;
    if (o.trace) {
      j["trace"] = json::parse(trace_config_json(*o.trace));
      json iter_ms = json::array();
      for (const auto& rec : o.trace->iterations) iter_ms.push_back(rec.wall_ms);
      j["iteration_wall_ms"] = iter_ms;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

void write_manifest(const Context& ctx, const json& body, Clock::time_point started) {
  json m = run_json(ctx);
  m["workers"] = ctx.workers;
  m["out"] = ctx.out.string();
  m["wall_ms"] = ms_since(started);
  for (const auto& [k, v] : body.items()) m[k] = v;
  write_file(ctx.out / "manifest.json", m.dump(2) + "\n");
}

/// Validates burn-in/bins against K and repeats before any compute.
void check_pool(std::size_t K, std::size_t repeats, std::size_t burn_in, std::size_t bins) {
  if (burn_in >= K) throw ConfigError("burn-in: must be smaller than K");
  if (bins < 1) throw ConfigError("bins: must be at least 1");
  if (repeats * (K - burn_in) < bins) {
    throw ConfigError("bins: " + std::to_string(bins) + " bins need at least as many pooled samples, " +
                      "but repeats x (K - burn-in) = " + std::to_string(repeats * (K - burn_in)));
  }
}

json estimate_json(const Context& ctx, const ModelSetup& s, const EstimateSummary& summary,
                   std::size_t completed_repeats) {
  json j = run_json(ctx);
  j["repeats_completed"] = completed_repeats;
  j["estimate"] = json::parse(summary_to_json(summary, names_of(s)));
  if (s.truth) {
    json truth = json::object();
    const auto names = names_of(s);
    for (std::size_t i = 0; i < names.size(); ++i) truth[names[i]] = (*s.truth)[i];
    j["truth"] = truth;
  }
  return j;
}

std::string histogram_csv(const Context& ctx, const ModelSetup& s, const EstimateSummary& summary) {
  std::ostringstream os;
  os << csv_preamble(ctx) << "param,bin,left,right,count,mode\n";
  const auto names = names_of(s);
  for (std::size_t i = 0; i < summary.histograms.size(); ++i) {
    const auto& h = summary.histograms[i];
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      os << names[i] << ',' << b << ',' << fmt(h.edges[b]) << ',' << fmt(h.edges[b + 1]) << ','
         << h.counts[b] << ',' << (b == h.mode_bin ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Grids

struct GridSpec {
  std::size_t param = 0;
  std::vector<double> values;
};

GridSpec grid_spec(const RunConfig& cfg, const ModelSetup& s, const std::string& default_param,
                   double lo, double hi, std::size_t points) {
  const auto names = names_of(s);
  const std::string name = cfg.get_string("grid-param", default_param.empty() ? names[0] : default_param);
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("grid-param: model has no parameter '" + name + "'");
  GridSpec g;
  g.param = static_cast<std::size_t>(it - names.begin());
  lo = cfg.get_double("grid-lo", lo);
  hi = cfg.get_double("grid-hi", hi);
  points = cfg.get_size("grid-points", points);
  if (points < 2 || !(hi > lo)) throw ConfigError("grid: need grid-points >= 2 and grid-hi > grid-lo");
  for (std::size_t i = 0; i < points; ++i) {
    g.values.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return g;
}

std::vector<ParamVector> grid_thetas(const ModelSetup& s, const ParamVector& around, const GridSpec& g) {
  std::vector<ParamVector> grid;
  for (double v : g.values) {
    std::vector<double> vals(around.values().begin(), around.values().end());
    vals[g.param] = v;
    ParamVector theta = around.with_values(std::move(vals));
    if (!theta.is_valid()) throw ConfigError("grid: point " + fmt(v) + " is outside the parameter domain");
    s.model->check_params(theta);
    grid.push_back(std::move(theta));
  }
  return grid;
}

struct SurfaceRun {
  ParamVector theta_ref;
  double online_loglik = 0.0;
  std::vector<SurfaceValue> values;
  SeedInfo seed;
};

SurfaceRun surface_at(const Problem& p, const ParamVector& theta_ref, std::size_t N,
                      const std::vector<ParamVector>& grid, RngStream rng) {
  auto sys = std::make_shared<const ParticleSystem>(
      run_frozen_bootstrap(*p.setup.model, theta_ref, N, p.data, rng));
  const LocalLikelihoodSurface surface(sys, p.setup.model, p.data);
  return {theta_ref, sys->online_loglik(), surface.eval_grid(grid), sys->seed()};
}

/// fig1_surfaces.csv: frozen systems at several reference values of b, each giving a
/// surface over the whole b-grid. Example 1 with q fixed at its true value.
std::string fig1_csv(const Context& ctx, const Problem& p, std::size_t N) {
  const auto& s = p.setup;
  const GridSpec g = grid_spec(ctx.cfg, s, "b", 10.0, 40.0, 301);
  const ParamVector around = *s.truth;
  const auto grid = grid_thetas(s, around, g);
  const std::size_t count = positive(ctx.cfg, "surfaces", 7);
  std::vector<SurfaceRun> runs(count);
  parallel_for(count, ctx.workers, [&](std::size_t i) {
    std::vector<double> ref(around.values().begin(), around.values().end());
    ref[g.param] = count == 1 ? g.values[g.values.size() / 2]
                              : g.values.front() + (g.values.back() - g.values.front()) *
                                                       static_cast<double>(i) / static_cast<double>(count - 1);
    runs[i] = surface_at(p, around.with_values(ref), N, grid, RngStream(ctx.seed, kSurfaceStreamBase + i));
  });

  std::ostringstream os;
  os << csv_preamble(ctx, {{"figure", "fig1"}, {"N", N}});
  const auto names = names_of(s);
  os << "surface," << names[g.param] << "_ref,online_loglik";
  for (const auto& n : names) os << ',' << n;
  os << ",loglik,degenerate\n";
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      os << i << ',' << fmt(runs[i].theta_ref[g.param]) << ',' << fmt(runs[i].online_loglik);
      for (double v : grid[j].values()) os << ',' << fmt(v);
      os << ',' << fmt(runs[i].values[j].loglik) << ',' << (runs[i].values[j].degenerate_at ? 1 : 0)
         << '\n';
    }
  }
  return os.str();
}

/// fig4_scatter.csv: independent bootstrap log-likelihood estimates across an a-grid.
std::string fig4_csv(const Context& ctx, const Problem& p, std::size_t N) {
  const auto& s = p.setup;
  const GridSpec g = grid_spec(ctx.cfg, s, "a", 0.2, 1.2, 41);
  const auto grid = grid_thetas(s, *s.truth, g);
  const std::size_t count = positive(ctx.cfg, "surfaces", 10);
  std::vector<double> ll(grid.size() * count);
  parallel_for(grid.size(), ctx.workers, [&](std::size_t j) {
    for (std::size_t r = 0; r < count; ++r) {
      const RngStream rng = RngStream(ctx.seed, kSurfaceStreamBase + r).split(j);
      try {
        ll[j * count + r] = run_frozen_bootstrap(*s.model, grid[j], N, p.data, rng).online_loglik();
      } catch (const WeightDegeneracy&) {
        ll[j * count + r] = -INFINITY;
      }
    }
  });
  std::ostringstream os;
  os << csv_preamble(ctx, {{"figure", "fig4"}, {"N", N}});
  const auto names = names_of(s);
  os << "filter";
  for (const auto& n : names) os << ',' << n;
  os << ",loglik\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (std::size_t r = 0; r < count; ++r) {
      os << r;
      for (double v : grid[j].values()) os << ',' << fmt(v);
      os << ',' << fmt(ll[j * count + r]) << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_simulate(const Context& ctx) {
  prepare_out(ctx);
  const std::string model = ctx.cfg.get_string("model", "example1");
  const Problem p = load_problem(ctx, model, model == "example2" ? 1000 : 100);
  const fs::path path = ctx.out / "dataset.csv";
  write_dataset_with_run(ctx, path, p);
  std::cout << "seed " << ctx.seed << "\n" << "wrote " << path.string() << " (T=" << p.data.horizon() << ")\n";
  return kExitOk;
}

struct IdentifyDefaults {
  std::string model;
  std::size_t T, N, K, repeats, burn_in;
};

int identify_like(const Context& ctx, const IdentifyDefaults& d, const std::string& traces_name,
                  const std::function<void(const Problem&, std::size_t N)>& extra_outputs,
                  const std::string& hist_name) {
  const auto started = Clock::now();
  const Problem p = load_problem(ctx, d.model, d.T);
  const IdentifyConfig ic = identify_config(ctx, d.K, d.N);
  const std::size_t repeats = positive(ctx.cfg, "repeats", d.repeats);
  const std::size_t burn_in = ctx.cfg.get_size("burn-in", d.burn_in);
  const std::size_t bins = ctx.cfg.get_size("bins", 50);
  check_pool(ic.iterations, repeats, burn_in, bins);
  for (std::size_t r = 0; r < repeats; ++r) initial_theta(ctx, p.setup, r);  // validates theta0
  prepare_out(ctx);

  if (p.data_source == "simulated") write_dataset_with_run(ctx, ctx.out / "dataset.csv", p);
  const auto outcomes = run_identify_repeats(ctx, p, ic, repeats);
  const std::size_t done = completed(outcomes);
  write_file(ctx.out / traces_name, traces_csv(ctx, p.setup, outcomes));

  json body{{"data", p.data_source},
            {"repeats", repeats_manifest(outcomes, kIdentifyStreamBase)},
            {"repeats_completed", done}};
  if (done == 0) {
    body["exit_code"] = kExitDegenerate;
    write_manifest(ctx, body, started);
    std::cerr << "no repeat completed\n";
    return kExitDegenerate;
  }

  const auto traces = completed_traces(outcomes);
  std::optional<EstimateSummary> summary;
  try {
    summary = extract_estimate(traces, burn_in, bins);
  } catch (const Error& e) {
    body["estimate_error"] = e.what();
  }
  if (summary) {
    write_file(ctx.out / "summary.json", estimate_json(ctx, p.setup, *summary, done).dump(2) + "\n");
    if (!hist_name.empty()) write_file(ctx.out / hist_name, histogram_csv(ctx, p.setup, *summary));
    std::cout << "estimate";
    const auto names = names_of(p.setup);
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::cout << ' ' << names[i] << '=' << fmt(summary->theta_hat[i]);
    }
    std::cout << " (" << done << "/" << repeats << " repeats)\n";
  }
  if (extra_outputs) extra_outputs(p, ic.num_particles);
  body["exit_code"] = kExitOk;
  write_manifest(ctx, body, started);
  return kExitOk;
}

int cmd_identify(const Context& ctx) {
  return identify_like(ctx, {"example1", 100, 100, 50, 1, 0}, "traces.csv", nullptr, "histogram.csv");
}

int cmd_replicate_ex1(const Context& ctx) {
  if (ctx.cfg.get_string("model", "example1") != "example1") {
    throw ConfigError("replicate-ex1: model is fixed to example1");
  }
  return identify_like(
      ctx, {"example1", 100, 100, 50, 20, 25}, "fig2a_traces.csv",
      [&](const Problem& p, std::size_t N) { write_file(ctx.out / "fig1_surfaces.csv", fig1_csv(ctx, p, N)); },
      "");
}

int cmd_replicate_ex2(const Context& ctx) {
  if (ctx.cfg.get_string("model", "example2") != "example2") {
    throw ConfigError("replicate-ex2: model is fixed to example2");
  }
  return identify_like(
      ctx, {"example2", 1000, 100, 150, 20, 50}, "fig5_traces.csv",
      [&](const Problem& p, std::size_t N) { write_file(ctx.out / "fig4_scatter.csv", fig4_csv(ctx, p, N)); },
      "fig6_hist.csv");
}

int cmd_grid(const Context& ctx) {
  const auto started = Clock::now();
  const Problem p = load_problem(ctx, "example1", 100);
  const auto& s = p.setup;
  ParamVector theta_ref = s.truth ? *s.truth : ParamVector{};
  if (const auto v = ctx.cfg.get_doubles("theta-ref")) theta_ref = params_from(s, "theta-ref", *v);
  if (theta_ref.size() == 0) throw ConfigError("theta-ref: required");
  const double centre = theta_ref[0];
  const GridSpec g = grid_spec(ctx.cfg, s, "", centre - 0.5 * std::abs(centre) - 1.0,
                               centre + 0.5 * std::abs(centre) + 1.0, 101);
  const auto grid = grid_thetas(s, theta_ref, g);
  const std::size_t N = positive(ctx.cfg, "N", 100);
  const std::size_t repeats = positive(ctx.cfg, "repeats", 1);
  prepare_out(ctx);

  std::vector<std::optional<SurfaceRun>> runs(repeats);
  std::vector<std::string> errors(repeats);
  parallel_for(repeats, ctx.workers, [&](std::size_t r) {
    try {
      runs[r] = surface_at(p, theta_ref, N, grid, RngStream(ctx.seed, kSurfaceStreamBase + r));
    } catch (const Error& e) {
      errors[r] = e.what();
    }
  });

  const auto* lgss = dynamic_cast<const LgssModel*>(s.model.get());
  std::ostringstream os;
  os << csv_preamble(ctx, {{"theta_ref", theta_json(theta_ref)}, {"N", N}});
  const auto names = names_of(s);
  os << "repeat,online_loglik";
  for (const auto& n : names) os << ',' << n;
  os << ",loglik,degenerate" << (lgss ? ",kalman\n" : "\n");
  std::size_t done = 0;
  for (std::size_t r = 0; r < repeats; ++r) {
    if (!runs[r]) continue;
    ++done;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      os << r << ',' << fmt(runs[r]->online_loglik);
      for (double v : grid[j].values()) os << ',' << fmt(v);
      os << ',' << fmt(runs[r]->values[j].loglik) << ',' << (runs[r]->values[j].degenerate_at ? 1 : 0);
      if (lgss) os << ',' << fmt(kalman_loglik(*lgss, grid[j], p.data));
      os << '\n';
    }
  }
  const std::string file = s.model->name() == "example1"   ? "fig1_surfaces.csv"
                           : s.model->name() == "example2" ? "fig4_scatter.csv"
                                                            : "surfaces.csv";
  write_file(ctx.out / file, os.str());
  json reps = json::array();
  for (std::size_t r = 0; r < repeats; ++r) {
    json j{{"repeat", r}, {"stream", kSurfaceStreamBase + r}, {"completed", runs[r].has_value()}};
    if (!errors[r].empty()) j["error"] = errors[r];
    reps.push_back(j);
  }
  const int code = done == 0 ? kExitDegenerate : kExitOk;
  write_manifest(ctx, {{"data", p.data_source}, {"repeats", reps}, {"exit_code", code}}, started);
  if (code != kExitOk) std::cerr << "grid: particle filter at theta_ref failed: " << errors[0] << "\n";
  return code;
}

double relative_distance(const ParamVector& theta, const ParamVector& truth) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    num += (theta[i] - truth[i]) * (theta[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  return std::sqrt(num / den);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_compare_sgd(const Context& ctx) {
  const auto started = Clock::now();
  const Problem p = load_problem(ctx, "example1", 100);
  if (!p.setup.truth) throw ConfigError("compare-sgd: model has no reference truth");
  const ParamVector truth = p.data.theta_true ? *p.data.theta_true : *p.setup.truth;
  const IdentifyConfig ic = identify_config(ctx, 50, 100);
  const std::size_t repeats = positive(ctx.cfg, "repeats", 20);
  SgdConfig sc;
  sc.num_particles = ic.num_particles;
  sc.seed = ctx.seed;
  sc.gamma0 = ctx.cfg.get_double("gamma0", sc.gamma0);
  sc.alpha = ctx.cfg.get_double("alpha", sc.alpha);
  sc.fd_step = ctx.cfg.get_double("fd-step", sc.fd_step);
  sc.steps = ctx.cfg.get_size("sgd-steps", 100000);
  if (!(sc.gamma0 > 0.0)) throw ConfigError("gamma0: must be positive");
  if (!(sc.alpha > 0.5 && sc.alpha <= 1.0)) throw ConfigError("alpha: must lie in (0.5, 1]");
  for (std::size_t r = 0; r < repeats; ++r) initial_theta(ctx, p.setup, r);
  prepare_out(ctx);
  if (p.data_source == "simulated") write_dataset_with_run(ctx, ctx.out / "dataset.csv", p);

  const auto proposed = run_identify_repeats(ctx, p, ic, repeats);
  std::vector<std::optional<IterationTrace>> sgd(repeats);
  std::vector<std::string> sgd_errors(repeats);
  parallel_for(repeats, ctx.workers, [&](std::size_t r) {
    if (!proposed[r].trace) return;
    SgdConfig c = sc;
    c.stream = kSgdStreamBase + r;
    c.density_budget = proposed[r].trace->density_evals;
    try {
      sgd[r] = sgd_identify(p.setup.model, p.data, proposed[r].theta0, c);
    } catch (const Error& e) {
      sgd_errors[r] = e.what();
    }
  });

  const std::uint64_t pass = static_cast<std::uint64_t>(p.data.horizon()) * ic.num_particles;
  auto write_distances = [&](const std::string& file, const std::string& method, auto&& trace_of) {
    std::ostringstream os;
    os << csv_preamble(ctx, {{"method", method}});
    os << "repeat,k";
    for (const auto& n : names_of(p.setup)) os << ',' << n;
    os << ",distance,density_evals\n";
    for (std::size_t r = 0; r < repeats; ++r) {
      const IterationTrace* tr = trace_of(r);
      if (!tr) continue;
      std::uint64_t spent = 0;
      for (std::size_t k = 0; k < tr->thetas.size(); ++k) {
        if (k > 0) {
          const auto& rec = tr->iterations[k - 1];
          spent += pass * (1 + rec.evals_used);
        }
        os << r << ',' << k;
        for (double v : tr->thetas[k].values()) os << ',' << fmt(v);
        os << ',' << fmt(relative_distance(tr->thetas[k], truth)) << ',' << spent << '\n';
      }
    }
    write_file(ctx.out / file, os.str());
  };
  write_distances("compare_proposed.csv", "proposed", [&](std::size_t r) -> const IterationTrace* {
    return proposed[r].trace ? &*proposed[r].trace : nullptr;
  });
  write_distances("compare_sgd.csv", "sgd", [&](std::size_t r) -> const IterationTrace* {
    return sgd[r] ? &*sgd[r] : nullptr;
  });

  std::vector<double> d_prop, d_sgd;
  json per = json::array();
  for (std::size_t r = 0; r < repeats; ++r) {
    if (!proposed[r].trace || !sgd[r]) continue;
    const double dp = relative_distance(proposed[r].trace->thetas.back(), truth);
    const double ds = sgd[r]->diverged ? INFINITY : relative_distance(sgd[r]->thetas.back(), truth);
    d_prop.push_back(dp);
    d_sgd.push_back(ds);
    per.push_back({{"repeat", r},
                   {"proposed", fmt(dp)},
                   {"sgd", fmt(ds)},
                   {"sgd_diverged", sgd[r]->diverged},
                   {"budget", proposed[r].trace->density_evals},
                   {"sgd_spent", sgd[r]->density_evals},
                   {"sgd_steps", sgd[r]->iterations.size()}});
  }
  json reps = repeats_manifest(proposed, kIdentifyStreamBase);
  for (std::size_t r = 0; r < repeats; ++r) {
    if (!sgd_errors[r].empty()) reps[r]["sgd_error"] = sgd_errors[r];
    reps[r]["sgd_stream"] = kSgdStreamBase + r;
  }
  if (d_prop.empty()) {
    write_manifest(ctx, {{"repeats", reps}, {"exit_code", kExitDegenerate}}, started);
    std::cerr << "no repeat completed for both methods\n";
    return kExitDegenerate;
  }
  json summary = run_json(ctx);
  summary["distance"] = "relative euclidean, natural space";
  summary["median_final_distance"] = {{"proposed", fmt(median(d_prop))}, {"sgd", fmt(median(d_sgd))}};
  summary["repeats"] = per;
  write_file(ctx.out / "compare_summary.json", summary.dump(2) + "\n");
  std::cout << "median final distance: proposed " << fmt(median(d_prop)) << ", sgd " << fmt(median(d_sgd))
            << "\n";
  write_manifest(ctx, {{"repeats", reps}, {"exit_code", kExitOk}}, started);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Iterated maximum likelihood for nonlinear state-space models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const auto& key : RunConfig::known_keys()) {
    flag_opts[key] = app.add_option("--" + key, flag_values[key]);
  }

  const std::vector<std::pair<std::string, std::function<int(const Context&)>>> commands{
      {"simulate", cmd_simulate},           {"identify", cmd_identify},
      {"grid", cmd_grid},                   {"compare-sgd", cmd_compare_sgd},
      {"replicate-ex1", cmd_replicate_ex1}, {"replicate-ex2", cmd_replicate_ex2},
  };
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Context ctx;
  try {
    if (!config_path.empty()) ctx.cfg = RunConfig::from_file(config_path);
    const RunConfig file_cfg = ctx.cfg;
    for (const auto& [key, opt] : flag_opts) {
      if (opt->count() > 0) ctx.cfg.set(key, flag_values[key]);
    }
    std::optional<std::string> flag_seed;
    if (flag_opts["seed"]->count() > 0) flag_seed = flag_values["seed"];
    ctx.seed = resolve_seed(flag_seed, file_cfg);
    ctx.out = ctx.cfg.get_string("out", "pfml_out");
    ctx.workers = ctx.cfg.get_size("workers", 0);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  for (const auto& [name, fn] : commands) {
    if (!app.got_subcommand(name)) continue;
    ctx.command = name;
    try {
      return fn(ctx);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitDegenerate;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << "\n";
      return 1;
    }
  }
  return kExitConfig;
}

}  // namespace pfml::cli
