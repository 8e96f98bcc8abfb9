#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bayestree/dataset.hpp"
#include "bayestree/hyperparams.hpp"
#include "bayestree/tree.hpp"

namespace bayestree {

// All densities live in log space. Values are finite or -infinity (zero
// probability); NaN never escapes.

// log(sum(exp(v))) guarded against overflow; -infinity for an empty span or
// all-(-infinity) input.
double log_sum_exp(std::span<const double> values);

// Leaves refitted from the rows each leaf receives:
// probs_k = (count_k + smoothing) / (n_leaf + K * smoothing), renormalized so
// the simplex invariant holds exactly. Empty leaves fall back to uniform.
// smoothing = 0 gives raw frequencies (zeros allowed).
Tree fit_leaves(Tree tree, const Dataset& data, double smoothing);

// Sum over rows of log probs[label] at the reached leaf.
double log_likelihood(const Tree& tree, const Dataset& data);

// Sum over internal nodes of log(1/F) + log(1/|candidates(feature)|);
// -infinity if any threshold is off its feature's candidate grid.
double log_param_prior(const Tree& tree, const Dataset& data);

// log a - beta * log(1 + depth).
double log_tree_prior(const Tree& tree, const Hyperparams& hp);

double log_joint(const Tree& tree, const Dataset& data, const Hyperparams& hp);

// Disjoint row ranges covering {0..rows-1}, sizes differing by at most 1.
struct Partition {
  struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
  };
  std::vector<Range> shards;

  static Partition even(std::size_t rows, unsigned shard_count);
};

// Same value as log_likelihood: shard partial sums may run concurrently (one
// worker per shard), then combine in a sequential fold in shard order, which
// keeps the result deterministic for a fixed shard count.
double partitioned_log_likelihood(const Tree& tree, const Dataset& data,
                                  const Partition& part);

double partitioned_log_joint(const Tree& tree, const Dataset& data,
                             const Hyperparams& hp, const Partition& part);

}  // namespace bayestree
