#pragma once

#include <cstdint>
#include <vector>

#include "bayestree/dataset.hpp"
#include "bayestree/hyperparams.hpp"
#include "bayestree/model.hpp"
#include "bayestree/moves.hpp"
#include "bayestree/rng.hpp"
#include "bayestree/tree.hpp"

namespace bayestree {

enum class LikelihoodMode { Sequential, Partitioned };

// One Markov chain position. current_log_joint caches log_joint(current) and
// is refreshed on every accept.
struct ChainState {
  Tree current;
  double current_log_joint = 0.0;
  std::uint64_t iteration = 0;
  std::uint64_t accepted_count = 0;
};

// Weighted particle population. When normalized, sum(exp(log_weights)) = 1.
// log_joints caches per-particle joint densities alongside the trees.
struct ParticleSet {
  std::vector<Tree> particles;
  std::vector<double> log_weights;
  bool normalized = false;
  std::vector<double> log_joints;
};

struct RetainedTree {
  Tree tree;
  std::uint64_t iteration = 0;  // chain step, or round index for particles
  double log_joint = 0.0;
};

struct PosteriorSample {
  std::vector<RetainedTree> trees;
};

// Standard Metropolis-Hastings log ratio for the proposal against the
// current state: [log_joint(T') - log_joint(T)] + [log_q_rev - log_q_fwd].
// The proposal's leaves are refitted before evaluation. -infinity when the
// proposed tree has zero posterior mass, +infinity when only the current
// state does.
double acceptance_log_ratio(const ChainState& state, const Proposal& prop,
                            const Dataset& data, const Hyperparams& hp);

// One transition: draw a proposal, refit its leaves, accept iff
// log u <= acceptance log ratio with u ~ U[0,1). A -infinity ratio is never
// accepted. iteration advances either way. In Partitioned mode every
// likelihood evaluation routes through partitioned_log_likelihood.
ChainState mcmc_step(ChainState state, const Dataset& data,
                     const Hyperparams& hp, RngStream& rng,
                     LikelihoodMode mode = LikelihoodMode::Sequential,
                     const Partition* partition = nullptr);

// Single chain from a fitted single-leaf tree (or a shallow random tree when
// hp.random_init). Runs hp.iterations steps and retains the chain state
// after every post-burn-in step. Partitioned mode shards the likelihood over
// hp.workers shards.
PosteriorSample run_mcmc(const Dataset& data, const Hyperparams& hp,
                         LikelihoodMode mode = LikelihoodMode::Sequential);

// Subtracts the log-sum-exp so that sum(exp(result)) = 1. Throws
// CollapsedParticlesError when every entry is -infinity.
std::vector<double> normalize_weights(std::vector<double> log_weights);

// C i.i.d. categorical draws by the normalized weights; the survivors all
// carry weight 1/C afterwards.
ParticleSet multinomial_resample(const ParticleSet& particles, RngStream& rng);

// Particle sampler: C = hp.workers particles evolve for
// floor(iterations / C) rounds. Each round proposes once per particle in
// parallel, weights by min(1, acceptance ratio), normalizes, resamples, and
// once past the burn-in round threshold (floor(burn_in / C)) stores all C
// post-resampling trees. Retained iteration tags are round indices.
PosteriorSample run_sumd(const Dataset& data, const Hyperparams& hp);

// Starting tree shared by all samplers: a fitted single leaf, or with
// hp.random_init one or two random grows applied before fitting.
Tree initial_tree(const Dataset& data, const Hyperparams& hp, RngStream& rng);

}  // namespace bayestree
