#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pfml {

enum class Transform { kUnconstrained, kLogPositive };

/// Parameter vector in natural space, with a per-component transform tag used
/// by the optimizer. Components tagged kLogPositive must be strictly positive.
class ParamVector {
 public:
  ParamVector() = default;
  /// All components unconstrained.
  explicit ParamVector(std::vector<double> values);
  ParamVector(std::vector<double> values, std::vector<Transform> transforms);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const Transform> transforms() const noexcept { return transforms_; }
  Transform transform(std::size_t i) const { return transforms_[i]; }

  /// Copy with the same tags and new values.
  ParamVector with_values(std::vector<double> values) const;

  bool is_valid() const noexcept;
  /// Throws pfml::Error naming the first offending component.
  void validate() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
  std::vector<Transform> transforms_;
};

std::string to_string(const ParamVector& theta);

}  // namespace pfml
