#pragma once

#include <stdexcept>
#include <string>

namespace bayestree {

// No feature offers a single candidate threshold, so no split can ever be
// proposed on this dataset.
struct DegenerateDatasetError : std::runtime_error {
  explicit DegenerateDatasetError(const std::string& what)
      : std::runtime_error(what) {}
};

// Every particle weight underflowed to zero probability, leaving nothing to
// normalize or resample from.
struct CollapsedParticlesError : std::runtime_error {
  explicit CollapsedParticlesError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace bayestree
