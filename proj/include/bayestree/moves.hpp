#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bayestree/dataset.hpp"
#include "bayestree/rng.hpp"
#include "bayestree/tree.hpp"

namespace bayestree {

enum class MoveKind { Grow, Prune, Change, Swap };

const char* move_kind_name(MoveKind kind);

// A sampled transition with its exact forward and reverse log proposal
// probabilities. Both log_q values are finite and exp of each is in (0, 1].
struct Proposal {
  MoveKind kind;
  Tree new_tree;
  double log_q_fwd = 0.0;
  double log_q_rev = 0.0;
};

// Kinds applicable to this tree, in fixed enum order:
//  Grow   - some leaf exists and some feature has a candidate threshold
//  Prune  - some internal node has two leaf children
//  Change - some internal node exists
//  Swap   - at least two internal nodes exist
std::vector<MoveKind> valid_moves(const Tree& tree, const Dataset& data);

// Samples a kind uniformly from valid_moves, then an outcome uniformly
// within the kind: Grow picks (leaf, splittable feature, candidate), Prune a
// grow-inverse node, Change an internal node plus fresh (feature, candidate)
// which may repeat the current pair, Swap an unordered pair of internal
// nodes whose (feature, threshold) pairs are exchanged.
//
// When the sampled outcome reproduces the current tree (Change hitting the
// same (k, c), Swap of nodes with equal parameters), several distinct draws
// map to the same tree, so log_q_fwd/log_q_rev aggregate every generating
// path. Leaves of new_tree are not refitted here.
//
// Throws DegenerateDatasetError when no feature has any candidate.
Proposal propose(const Tree& tree, const Dataset& data, RngStream& rng);

// One entry per (kind, concrete draw) pair reachable from `tree` in a single
// proposal, with that single path's log probability. Outcomes reproducing
// the source tree appear once per generating path; callers aggregate.
struct MoveOutcome {
  MoveKind kind;
  Tree tree;
  double log_prob;
};
std::vector<MoveOutcome> enumerate_moves(const Tree& tree, const Dataset& data);

// Total log probability that one propose(from) call yields a tree
// structurally identical to `to`, summed over every generating path;
// nullopt when no single move can produce it. Brute force by construction,
// which makes it the oracle for Proposal's log_q fields.
std::optional<double> transition_log_prob(const Tree& from, const Tree& to,
                                          const Dataset& data);

}  // namespace bayestree
