#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfml::cli {

/// Invalid or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value configuration. Keys use the long flag names without dashes
/// ("burn-in", "theta-ref", ...).
class RunConfig {
 public:
  static const std::vector<std::string>& known_keys();

  /// Parses `key = value` lines; '#' starts a comment. Unknown keys are errors.
  static RunConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::optional<std::string> find(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  /// Comma-separated reals; nullopt if the key is absent.
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t parse_u64(const std::string& key, const std::string& text);

/// Seed precedence: --seed, then the config file, then PFML_SEED, then 1.
std::uint64_t resolve_seed(const std::optional<std::string>& flag_seed, const RunConfig& file);

}  // namespace pfml::cli
