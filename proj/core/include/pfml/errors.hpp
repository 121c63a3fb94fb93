#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pfml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All importance weights vanished at step `t`. At a reference parameter this
/// means the likelihood underflowed and the parameter must be rejected.
class WeightDegeneracy : public Error {
 public:
  explicit WeightDegeneracy(std::size_t t);
  std::size_t step() const noexcept { return t_; }

 private:
  std::size_t t_;
};

/// A model density returned NaN (or +inf) at step `t`, particle `n`.
class NonFiniteDensity : public Error {
 public:
  NonFiniteDensity(std::string density, std::size_t t, std::size_t n);
  const std::string& density() const noexcept { return density_; }
  std::size_t step() const noexcept { return t_; }
  std::size_t particle() const noexcept { return n_; }

 private:
  std::string density_;
  std::size_t t_;
  std::size_t n_;
};

}  // namespace pfml
