#include "bayestree/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "bayestree/errors.hpp"
#include "bayestree/parallel.hpp"

namespace bayestree {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

double mh_log_alpha(double lj_new, double lj_cur, double log_q_fwd,
                    double log_q_rev) {
  if (lj_new == kNegInf) return kNegInf;
  if (lj_cur == kNegInf) return kPosInf;
  return (lj_new - lj_cur) + (log_q_rev - log_q_fwd);
}

double joint_for_mode(const Tree& tree, const Dataset& data,
                      const Hyperparams& hp, LikelihoodMode mode,
                      const Partition* partition) {
  if (mode == LikelihoodMode::Partitioned) {
    if (partition == nullptr) {
      throw std::invalid_argument("partitioned mode needs a partition");
    }
    return partitioned_log_joint(tree, data, hp, *partition);
  }
  return log_joint(tree, data, hp);
}

}  // namespace

Tree initial_tree(const Dataset& data, const Hyperparams& hp, RngStream& rng) {
  Tree t = Tree::single_leaf(data.class_count());
  if (hp.random_init && !data.splittable_features().empty()) {
    const std::size_t grows = 1 + rng.next_index(2);
    for (std::size_t g = 0; g < grows; ++g) {
      const auto leaves = t.leaf_ids();
      const auto splittable = data.splittable_features();
      const std::size_t feat = splittable[rng.next_index(splittable.size())];
      const auto cand = data.candidates(feat);
      t.grow_at(leaves[rng.next_index(leaves.size())], static_cast<int>(feat),
                cand[rng.next_index(cand.size())]);
    }
  }
  return fit_leaves(std::move(t), data, hp.leaf_smoothing);
}

double acceptance_log_ratio(const ChainState& state, const Proposal& prop,
                            const Dataset& data, const Hyperparams& hp) {
  const Tree fitted = fit_leaves(prop.new_tree, data, hp.leaf_smoothing);
  const double lj = log_joint(fitted, data, hp);
  return mh_log_alpha(lj, state.current_log_joint, prop.log_q_fwd,
                      prop.log_q_rev);
}

ChainState mcmc_step(ChainState state, const Dataset& data,
                     const Hyperparams& hp, RngStream& rng,
                     LikelihoodMode mode, const Partition* partition) {
  Proposal prop = propose(state.current, data, rng);
  Tree fitted = fit_leaves(std::move(prop.new_tree), data, hp.leaf_smoothing);
  const double lj = joint_for_mode(fitted, data, hp, mode, partition);
  const double log_alpha =
      mh_log_alpha(lj, state.current_log_joint, prop.log_q_fwd, prop.log_q_rev);

  const double u = rng.next_double();
  const bool accept = log_alpha > kNegInf && std::log(u) <= log_alpha;

  state.iteration += 1;
  if (accept) {
    state.current = std::move(fitted);
    state.current_log_joint = lj;
    state.accepted_count += 1;
  }
  return state;
}

PosteriorSample run_mcmc(const Dataset& data, const Hyperparams& hp,
                         LikelihoodMode mode) {
  hp.validate();

  Partition partition;
  const Partition* part_ptr = nullptr;
  if (mode == LikelihoodMode::Partitioned) {
    unsigned shards = hp.workers;
    if (static_cast<std::size_t>(shards) > data.rows()) {
      shards = static_cast<unsigned>(data.rows());
    }
    partition = Partition::even(data.rows(), shards);
    part_ptr = &partition;
  }

  RngStream init_rng(hp.seed, StreamPurpose::Init, 0, 0);
  ChainState state;
  state.current = initial_tree(data, hp, init_rng);
  state.current_log_joint =
      joint_for_mode(state.current, data, hp, mode, part_ptr);

  PosteriorSample out;
  out.trees.reserve(hp.iterations - hp.burn_in);
  for (std::uint64_t i = 1; i <= hp.iterations; ++i) {
    RngStream rng(hp.seed, StreamPurpose::McmcStep, 0, i);
    state = mcmc_step(std::move(state), data, hp, rng, mode, part_ptr);
    if (i > hp.burn_in) {
      out.trees.push_back({state.current, i, state.current_log_joint});
    }
  }
  return out;
}

std::vector<double> normalize_weights(std::vector<double> log_weights) {
  if (log_weights.empty()) {
    throw std::invalid_argument("normalize_weights: no weights");
  }
  const double lse = log_sum_exp(log_weights);
  if (lse == kNegInf) {
    throw CollapsedParticlesError(
        "normalize_weights: every particle weight is zero");
  }
  for (double& w : log_weights) w -= lse;
  return log_weights;
}

ParticleSet multinomial_resample(const ParticleSet& particles, RngStream& rng) {
  if (!particles.normalized) {
    throw std::invalid_argument("multinomial_resample: weights not normalized");
  }
  const std::size_t c = particles.particles.size();
  if (c == 0 || particles.log_weights.size() != c) {
    throw std::invalid_argument("multinomial_resample: malformed particle set");
  }

  std::vector<double> cumulative(c);
  double acc = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    acc += std::exp(particles.log_weights[i]);
    cumulative[i] = acc;
  }

  ParticleSet out;
  out.particles.reserve(c);
  out.log_joints.reserve(c);
  const bool with_joints = particles.log_joints.size() == c;
  for (std::size_t draw = 0; draw < c; ++draw) {
    // scale into the realized total so rounding in the cumsum cannot push
    // the draw past the last bucket
    const double u = rng.next_double() * acc;
    const std::size_t pick = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    const std::size_t idx = std::min(pick, c - 1);
    out.particles.push_back(particles.particles[idx]);
    if (with_joints) out.log_joints.push_back(particles.log_joints[idx]);
  }
  out.log_weights.assign(c, -std::log(static_cast<double>(c)));
  out.normalized = true;
  return out;
}

PosteriorSample run_sumd(const Dataset& data, const Hyperparams& hp) {
  hp.validate();

  const std::uint64_t c = hp.workers;
  const std::uint64_t rounds = hp.iterations / c;
  if (rounds == 0) {
    throw std::invalid_argument("run_sumd: fewer iterations than particles");
  }
  // floor(burn_in / C) rounds are discarded; since burn_in < iterations can
  // still round to the full schedule, the final round is always retained
  std::uint64_t burn_rounds = hp.burn_in / c;
  if (burn_rounds >= rounds) burn_rounds = rounds - 1;

  struct ParticleStep {
    Tree tree;
    double log_joint;
    double log_weight;
  };

  std::vector<Tree> current(c);
  std::vector<double> joints(c);
  for (std::uint64_t p = 0; p < c; ++p) {
    RngStream rng(hp.seed, StreamPurpose::Init, p, 0);
    current[p] = initial_tree(data, hp, rng);
    joints[p] = log_joint(current[p], data, hp);
  }

  PosteriorSample out;
  out.trees.reserve((rounds - burn_rounds) * c);

  for (std::uint64_t round = 0; round < rounds; ++round) {
    auto steps = parallel_map_ordered<ParticleStep>(
        c, static_cast<unsigned>(c), [&](std::size_t p) {
          RngStream rng(hp.seed, StreamPurpose::SumdParticle, p, round);
          Proposal prop = propose(current[p], data, rng);
          Tree fitted =
              fit_leaves(std::move(prop.new_tree), data, hp.leaf_smoothing);
          const double lj = log_joint(fitted, data, hp);
          const double log_alpha =
              mh_log_alpha(lj, joints[p], prop.log_q_fwd, prop.log_q_rev);
          // incremental weight is the acceptance quantity capped at 1
          const double lw = std::min(0.0, log_alpha);
          return ParticleStep{std::move(fitted), lj, lw};
        });

    ParticleSet set;
    set.particles.reserve(c);
    set.log_joints.reserve(c);
    std::vector<double> weights;
    weights.reserve(c);
    for (auto& s : steps) {
      set.particles.push_back(std::move(s.tree));
      set.log_joints.push_back(s.log_joint);
      weights.push_back(s.log_weight);
    }
    set.log_weights = normalize_weights(std::move(weights));
    set.normalized = true;

    RngStream resample_rng(hp.seed, StreamPurpose::Resample, 0, round);
    ParticleSet survivors = multinomial_resample(set, resample_rng);
    current = std::move(survivors.particles);
    joints = std::move(survivors.log_joints);

    if (round >= burn_rounds) {
      for (std::uint64_t p = 0; p < c; ++p) {
        out.trees.push_back({current[p], round, joints[p]});
      }
    }
  }
  return out;
}

}  // namespace bayestree
