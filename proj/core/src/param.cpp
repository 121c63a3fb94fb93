#include "pfml/param.hpp"

#include <cmath>
#include <sstream>

#include "pfml/errors.hpp"
#include "pfml/io.hpp"

namespace pfml {

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)), transforms_(values_.size(), Transform::kUnconstrained) {}

ParamVector::ParamVector(std::vector<double> values, std::vector<Transform> transforms)
    : values_(std::move(values)), transforms_(std::move(transforms)) {
  if (values_.size() != transforms_.size()) {
    throw Error("ParamVector: " + std::to_string(values_.size()) + " values but " +
                std::to_string(transforms_.size()) + " transform tags");
  }
}

ParamVector ParamVector::with_values(std::vector<double> values) const {
  return ParamVector(std::move(values), transforms_);
}

bool ParamVector::is_valid() const noexcept {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) return false;
    if (transforms_[i] == Transform::kLogPositive && !(values_[i] > 0.0)) return false;
  }
  return true;
}

void ParamVector::validate() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error("parameter " + std::to_string(i) + " is not finite");
    }
    if (transforms_[i] == Transform::kLogPositive && !(values_[i] > 0.0)) {
      throw Error("parameter " + std::to_string(i) + " must be positive, got " +
                  format_double(values_[i]));
    }
  }
}

std::string to_string(const ParamVector& theta) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (i) os << ", ";
    os << format_double(theta[i]);
  }
  os << '}';
  return os.str();
}

}  // namespace pfml
