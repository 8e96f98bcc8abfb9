#pragma once

#include <cstdint>

namespace bayestree {

// Sampler configuration shared by every inference method.
struct Hyperparams {
  double a = 1.0;                // tree-prior scale, > 0
  double beta = 1.0;             // depth penalty exponent, >= 0
  std::uint64_t iterations = 8000;
  std::uint64_t burn_in = 4000;  // must stay below iterations
  unsigned workers = 1;          // particles / shards / thread budget
  std::uint64_t seed = 0;
  double leaf_smoothing = 1.0;   // pseudocount per class when fitting leaves
  bool random_init = false;      // start from a randomly grown tree, depth <= 2

  void validate() const;  // throws std::invalid_argument
};

}  // namespace bayestree
