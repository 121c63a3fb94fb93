#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pfml/io.hpp"

namespace pfml::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys{
      "model",      "T",          "N",           "K",          "seed",        "repeats",
      "workers",    "burn-in",    "bins",        "out",        "data",        "theta",
      "theta0",     "theta-ref",  "grid-param",  "grid-lo",    "grid-hi",     "grid-points",
      "gamma0",     "alpha",      "sgd-steps",   "fd-step",    "input-seed",  "unknowns",
      "optimizer",  "max-evals",  "x-tol",       "f-tol",      "weighting",   "surfaces",
  };
  return keys;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    cfg.set(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::optional<std::string> RunConfig::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = find(key);
  return v ? parse_u64(key, *v) : fallback;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    return parse_double(*v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + *v + "'");
  }
}

std::optional<std::vector<double>> RunConfig::get_doubles(const std::string& key) const {
  const auto v = find(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  std::istringstream is(*v);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      out.push_back(parse_double(trim(item)));
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected comma-separated numbers, got '" + *v + "'");
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<std::string> RunConfig::get_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  std::istringstream is(*v);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (!trim(item).empty()) out.push_back(trim(item));
  }
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::string>& flag_seed, const RunConfig& file) {
  if (flag_seed) return parse_u64("seed", *flag_seed);
  if (const auto v = file.find("seed")) return parse_u64("seed", *v);
  if (const char* env = std::getenv("PFML_SEED"); env && *env) return parse_u64("PFML_SEED", env);
  return 1;
}

}  // namespace pfml::cli
