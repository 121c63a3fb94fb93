#include "pfml/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "pfml/errors.hpp"

namespace pfml {
namespace {

using nlohmann::json;

constexpr int kParticleSystemVersion = 1;
constexpr int kDatasetVersion = 1;

std::string transform_name(Transform t) {
  return t == Transform::kLogPositive ? "log-positive" : "unconstrained";
}

Transform transform_from_name(const std::string& s) {
  if (s == "log-positive") return Transform::kLogPositive;
  if (s == "unconstrained") return Transform::kUnconstrained;
  throw Error("unknown transform tag '" + s + "'");
}

// JSON has no infinities; non-finite doubles are stored as strings.
json number(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

double to_double(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

json numbers(std::span<const double> v) {
  json arr = json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

std::vector<double> doubles(const json& arr) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& j : arr) out.push_back(to_double(j));
  return out;
}

json param_json(const ParamVector& theta) {
  json tags = json::array();
  for (Transform t : theta.transforms()) tags.push_back(transform_name(t));
  return json{{"values", numbers(theta.values())}, {"transforms", tags}};
}

ParamVector param_from_json(const json& j) {
  std::vector<Transform> tags;
  for (const auto& t : j.at("transforms")) tags.push_back(transform_from_name(t.get<std::string>()));
  return ParamVector(doubles(j.at("values")), std::move(tags));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("cannot parse '" + std::string(s) + "' as a number");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Dataset

void write_dataset(const std::filesystem::path& csv_path, const Dataset& data,
                   const StateSpaceModel& model) {
  const std::size_t ny = data.obs_dim();
  const std::size_t nx = data.has_trajectory() ? data.state_dim() : 0;
  const auto first_input = model.input(1);
  const std::size_t nu = first_input ? first_input->size() : 0;

  auto os = open_out(csv_path);
  os << "t";
  for (std::size_t i = 1; i <= ny; ++i) os << ",y_" << i;
  for (std::size_t i = 1; i <= nx; ++i) os << ",x_" << i;
  for (std::size_t i = 1; i <= nu; ++i) os << ",u_" << i;
  os << '\n';
  for (std::size_t t = 1; t <= data.horizon(); ++t) {
    os << t;
    for (double y : data.obs(t)) os << ',' << format_double(y);
    if (nx) {
      for (double x : data.state(t)) os << ',' << format_double(x);
    }
    if (nu) {
      const auto u = model.input(t);
      for (double v : *u) os << ',' << format_double(v);
    }
    os << '\n';
  }

  json meta{{"format", "pfml-dataset"},
            {"version", kDatasetVersion},
            {"model", model.name()},
            {"T", data.horizon()},
            {"obs_dim", ny},
            {"state_dim", nx},
            {"input_dim", nu},
            {"param_names", model.param_names()}};
  if (data.theta_true) meta["theta_true"] = param_json(*data.theta_true);
  if (data.seed) meta["seed"] = json{{"seed", data.seed->seed}, {"stream", data.seed->stream}};
  if (nx) meta["x0"] = numbers(data.state(0));
  auto side = csv_path;
  side.replace_extension(".json");
  auto js = open_out(side);
  js << meta.dump(2) << '\n';
}

LoadedDataset read_dataset(const std::filesystem::path& csv_path) {
  std::ifstream is(csv_path);
  if (!is) throw Error("cannot open dataset '" + csv_path.string() + "'");
  std::string line;
  if (!std::getline(is, line)) throw Error("dataset '" + csv_path.string() + "' is empty");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t") throw Error("dataset header must start with 't'");

  std::vector<std::size_t> y_cols, x_cols, u_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind("y_", 0) == 0) y_cols.push_back(c);
    else if (header[c].rfind("x_", 0) == 0) x_cols.push_back(c);
    else if (header[c].rfind("u_", 0) == 0) u_cols.push_back(c);
    else throw Error("dataset: unexpected column '" + header[c] + "'");
  }
  if (y_cols.empty()) throw Error("dataset: no observation columns");

  std::vector<double> y, x, u;
  std::size_t expected_t = 1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error("dataset: row " + std::to_string(expected_t) + " has " +
                  std::to_string(cells.size()) + " fields, header has " +
                  std::to_string(header.size()));
    }
    if (static_cast<std::size_t>(parse_double(cells[0])) != expected_t) {
      throw Error("dataset: rows must be t = 1..T in order");
    }
    for (auto c : y_cols) y.push_back(parse_double(cells[c]));
    for (auto c : x_cols) x.push_back(parse_double(cells[c]));
    for (auto c : u_cols) u.push_back(parse_double(cells[c]));
    ++expected_t;
  }

  LoadedDataset out;
  out.data = Dataset(y_cols.size(), std::move(y));
  out.inputs = std::move(u);

  auto side = csv_path;
  side.replace_extension(".json");
  if (std::filesystem::exists(side)) {
    const json meta = json::parse(read_text(side));
    out.model_name = meta.value("model", "");
    if (meta.contains("param_names")) {
      out.param_names = meta.at("param_names").get<std::vector<std::string>>();
    }
    if (meta.contains("theta_true")) out.data.theta_true = param_from_json(meta.at("theta_true"));
    if (meta.contains("seed")) {
      out.data.seed = SeedInfo{meta.at("seed").at("seed").get<std::uint64_t>(),
                               meta.at("seed").at("stream").get<std::uint64_t>()};
    }
    if (!x_cols.empty() && meta.contains("x0")) {
      std::vector<double> traj = doubles(meta.at("x0"));
      traj.insert(traj.end(), x.begin(), x.end());
      out.data.set_trajectory(x_cols.size(), std::move(traj));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Particle system archive

std::string particle_system_to_json(const ParticleSystem& system, const std::string& model_name) {
  json ancestors = json::array();
  for (auto a : system.all_ancestors()) ancestors.push_back(a);
  const json j{{"format", "pfml-particle-system"},
               {"version", kParticleSystemVersion},
               {"model", model_name},
               {"N", system.num_particles()},
               {"T", system.horizon()},
               {"state_dim", system.state_dim()},
               {"theta_ref", param_json(system.theta_ref())},
               {"seed", {{"seed", system.seed().seed}, {"stream", system.seed().stream}}},
               {"online_loglik", number(system.online_loglik())},
               {"particles", numbers(system.all_particles())},
               {"ancestors", ancestors},
               {"online_logweights", numbers(system.all_online_logweights())}};
  return j.dump();
}

ParticleSystem particle_system_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "pfml-particle-system") {
    throw Error("not a pfml particle system archive");
  }
  const int version = j.at("version").get<int>();
  if (version != kParticleSystemVersion) {
    throw Error("unsupported particle system archive version " + std::to_string(version));
  }
  return ParticleSystem(param_from_json(j.at("theta_ref")), j.at("N").get<std::size_t>(),
                        j.at("T").get<std::size_t>(), j.at("state_dim").get<std::size_t>(),
                        doubles(j.at("particles")),
                        j.at("ancestors").get<std::vector<std::uint32_t>>(),
                        doubles(j.at("online_logweights")), to_double(j.at("online_loglik")),
                        SeedInfo{j.at("seed").at("seed").get<std::uint64_t>(),
                                 j.at("seed").at("stream").get<std::uint64_t>()});
}

void write_particle_system(const std::filesystem::path& path, const ParticleSystem& system,
                           const std::string& model_name) {
  auto os = open_out(path);
  os << particle_system_to_json(system, model_name) << '\n';
}

ParticleSystem read_particle_system(const std::filesystem::path& path) {
  return particle_system_from_json(read_text(path));
}

// ---------------------------------------------------------------------------
// Surfaces, traces and summaries

void write_surface_csv(std::ostream& os, std::span<const ParamVector> grid,
                       std::span<const SurfaceValue> values,
                       std::span<const std::string> param_names) {
  if (grid.size() != values.size()) throw Error("write_surface_csv: size mismatch");
  for (const auto& name : param_names) os << name << ',';
  os << "loglik,degenerate\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (double v : grid[i].values()) os << format_double(v) << ',';
    os << format_double(values[i].loglik) << ',' << (values[i].degenerate_at ? 1 : 0) << '\n';
  }
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace,
                     std::span<const std::string> param_names) {
  os << "k";
  for (const auto& name : param_names) os << ',' << name;
  os << ",inner_value,online_loglik,evals,skipped\n";
  for (std::size_t k = 0; k < trace.thetas.size(); ++k) {
    os << k;
    for (double v : trace.thetas[k].values()) os << ',' << format_double(v);
    if (k == 0) {
      os << ",,,,\n";
      continue;
    }
    const auto& rec = trace.iterations[k - 1];
    os << ',' << format_double(rec.value) << ',' << format_double(rec.online_loglik) << ','
       << rec.evals_used << ',' << (rec.skipped ? 1 : 0) << '\n';
  }
}

std::string trace_config_json(const IterationTrace& trace) {
  json j{{"method", trace.method},
         {"aborted", trace.aborted},
         {"diverged", trace.diverged},
         {"diagnostic", trace.diagnostic},
         {"density_evals", trace.density_evals},
         {"iterations", trace.iterations.size()}};
  if (trace.identify_config) {
    const auto& c = *trace.identify_config;
    j["config"] = {{"K", c.iterations},
                   {"N", c.num_particles},
                   {"seed", c.seed},
                   {"stream", c.stream},
                   {"weighting", c.weighting == AncestorWeighting::kSelfNormalized
                                     ? "self-normalized"
                                     : "ratio-of-sums"},
                   {"optimizer",
                    {{"method", std::string(to_string(c.optimizer.method))},
                     {"max_evals", c.optimizer.max_evals},
                     {"x_tolerance", c.optimizer.x_tolerance},
                     {"f_tolerance", c.optimizer.f_tolerance}}}};
  }
  if (trace.sgd_config) {
    const auto& c = *trace.sgd_config;
    j["config"] = {{"steps", c.steps},           {"N", c.num_particles},
                   {"gamma0", c.gamma0},         {"alpha", c.alpha},
                   {"fd_step", c.fd_step},       {"seed", c.seed},
                   {"stream", c.stream},         {"density_budget", c.density_budget},
                   {"divergence_bound", c.divergence_bound}};
  }
  json seeds = json::array();
  for (const auto& rec : trace.iterations) {
    seeds.push_back({{"k", rec.k}, {"seed", rec.system_seed.seed}, {"stream", rec.system_seed.stream}});
  }
  j["system_seeds"] = seeds;
  return j.dump(2);
}

std::string summary_to_json(const EstimateSummary& summary,
                            std::span<const std::string> param_names) {
  json hat = json::object();
  json hists = json::array();
  for (std::size_t i = 0; i < summary.histograms.size(); ++i) {
    const std::string name = i < param_names.size() ? param_names[i] : "theta_" + std::to_string(i);
    hat[name] = number(summary.theta_hat[i]);
    const auto& h = summary.histograms[i];
    hists.push_back({{"param", name},
                     {"edges", numbers(h.edges)},
                     {"counts", h.counts},
                     {"mode_bin", h.mode_bin},
                     {"mode_center", number(h.mode_center)}});
  }
  const json j{{"theta_hat", hat},
               {"burn_in", summary.burn_in},
               {"samples_used", summary.samples_used},
               {"histograms", hists}};
  return j.dump(2);
}

}  // namespace pfml
