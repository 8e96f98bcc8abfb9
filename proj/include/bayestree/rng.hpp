#pragma once

#include <cstddef>
#include <cstdint>

namespace bayestree {

// Tags separating the independent random streams used across a run. A stream
// is keyed by (root seed, purpose, index, round), so e.g. the proposal stream
// of particle 7 in round 42 is the same object no matter which thread asks
// for it.
enum class StreamPurpose : std::uint64_t {
  McmcStep = 1,
  SumdParticle = 2,
  Resample = 3,
  Folds = 4,
  Synthetic = 5,
  Init = 6,
};

// Counter-keyed xoshiro256++ generator. Construction hashes the key into the
// 256-bit state; two streams built from the same key emit identical output.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, StreamPurpose purpose,
            std::uint64_t index = 0, std::uint64_t round = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53 random mantissa bits.
  double next_double();

  // Uniform on {0, ..., n-1} via rejection, n must be positive.
  std::size_t next_index(std::size_t n);

 private:
  std::uint64_t state_[4];
};

}  // namespace bayestree
