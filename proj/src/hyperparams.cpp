#include "bayestree/hyperparams.hpp"

#include <cmath>
#include <stdexcept>

namespace bayestree {

void Hyperparams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("hyperparams: a must be positive and finite");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("hyperparams: beta must be >= 0 and finite");
  }
  if (iterations == 0) {
    throw std::invalid_argument("hyperparams: iterations must be positive");
  }
  if (burn_in >= iterations) {
    throw std::invalid_argument("hyperparams: burn_in must be below iterations");
  }
  if (workers == 0) {
    throw std::invalid_argument("hyperparams: workers must be positive");
  }
  if (!(leaf_smoothing > 0.0) || !std::isfinite(leaf_smoothing)) {
    throw std::invalid_argument(
        "hyperparams: leaf_smoothing must be positive and finite");
  }
}

}  // namespace bayestree
