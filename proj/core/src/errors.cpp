#include "pfml/errors.hpp"

namespace pfml {

WeightDegeneracy::WeightDegeneracy(std::size_t t)
    : Error("weight degeneracy: all importance weights vanished at t=" + std::to_string(t)),
      t_(t) {}

NonFiniteDensity::NonFiniteDensity(std::string density, std::size_t t, std::size_t n)
    : Error(density + " returned a non-finite value at t=" + std::to_string(t) +
            ", particle " + std::to_string(n)),
      density_(std::move(density)),
      t_(t),
      n_(n) {}

}  // namespace pfml
