#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <span>
#include <string>
#include <vector>

#include "pfml/dataset.hpp"
#include "pfml/identification.hpp"
#include "pfml/local_likelihood.hpp"
#include "pfml/model.hpp"
#include "pfml/particle_system.hpp"

namespace pfml {

/// Shortest decimal string that parses back to the same double. Infinities are
/// written as "inf"/"-inf".
std::string format_double(double v);
/// Inverse of format_double; throws pfml::Error on malformed input.
double parse_double(std::string_view s);

/// Dataset as CSV (t, y_1.., x_1.., u_1..) plus a JSON sidecar at
/// `<stem>.json`. x_0 lives in the sidecar. Inputs come from the model when it
/// has any.
void write_dataset(const std::filesystem::path& csv_path, const Dataset& data,
                   const StateSpaceModel& model);

struct LoadedDataset {
  Dataset data;
  std::string model_name;
  std::vector<double> inputs;  ///< u_{1:T} if the CSV carries a u column
  std::vector<std::string> param_names;
};

LoadedDataset read_dataset(const std::filesystem::path& csv_path);

/// Versioned JSON archive of a frozen particle system.
std::string particle_system_to_json(const ParticleSystem& system, const std::string& model_name);
ParticleSystem particle_system_from_json(const std::string& text);
void write_particle_system(const std::filesystem::path& path, const ParticleSystem& system,
                           const std::string& model_name);
ParticleSystem read_particle_system(const std::filesystem::path& path);

/// Rows: theta components, loglik, degenerate flag (0/1).
void write_surface_csv(std::ostream& os, std::span<const ParamVector> grid,
                       std::span<const SurfaceValue> values,
                       std::span<const std::string> param_names);

/// Rows: k, theta components, inner value, online loglik, evals, skipped.
void write_trace_csv(std::ostream& os, const IterationTrace& trace,
                     std::span<const std::string> param_names);

/// JSON for the trace config and seeds (everything but the per-k rows).
std::string trace_config_json(const IterationTrace& trace);
std::string summary_to_json(const EstimateSummary& summary,
                            std::span<const std::string> param_names);

}  // namespace pfml
