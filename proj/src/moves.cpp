#include "bayestree/moves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bayestree/errors.hpp"
#include "bayestree/model.hpp"

namespace bayestree {

namespace {

double log_of(std::size_t n) { return std::log(static_cast<double>(n)); }

bool has_kind(const std::vector<MoveKind>& kinds, MoveKind k) {
  return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
}

// Probability that one propose() call regenerates `tree` itself. Only two
// draw families can do that: Change resampling a node's current (k, c), and
// Swap of two nodes whose (k, c) pairs are equal. Grow and Prune always
// change the leaf count. Computed in linear space; the terms are far above
// underflow range.
double self_transition_log_prob(const Tree& tree, const Dataset& data,
                                const std::vector<MoveKind>& kinds) {
  const auto internals = tree.internal_ids();
  const std::size_t m = internals.size();
  const double p_kind = 1.0 / static_cast<double>(kinds.size());
  const double p_feat = 1.0 / static_cast<double>(data.splittable_features().size());

  double total = 0.0;
  if (has_kind(kinds, MoveKind::Change)) {
    for (int id : internals) {
      const Node& n = tree.node(id);
      const auto cand = data.candidates(n.feature);
      if (!cand.empty() && data.on_candidate_grid(n.feature, n.threshold)) {
        total += p_kind / static_cast<double>(m) * p_feat /
                 static_cast<double>(cand.size());
      }
    }
  }
  if (has_kind(kinds, MoveKind::Swap)) {
    const double p_pair = 2.0 / (static_cast<double>(m) * static_cast<double>(m - 1));
    for (std::size_t i = 0; i < m; ++i) {
      const Node& a = tree.node(internals[i]);
      for (std::size_t j = i + 1; j < m; ++j) {
        const Node& b = tree.node(internals[j]);
        if (a.feature == b.feature && a.threshold == b.threshold) {
          total += p_kind * p_pair;
        }
      }
    }
  }
  return std::log(total);
}

}  // namespace

const char* move_kind_name(MoveKind kind) {
  switch (kind) {
    case MoveKind::Grow: return "grow";
    case MoveKind::Prune: return "prune";
    case MoveKind::Change: return "change";
    case MoveKind::Swap: return "swap";
  }
  return "unknown";
}

std::vector<MoveKind> valid_moves(const Tree& tree, const Dataset& data) {
  const TreeStats s = tree.stats();
  std::vector<MoveKind> kinds;
  if (s.leaf_count > 0 && !data.splittable_features().empty()) {
    kinds.push_back(MoveKind::Grow);
  }
  if (s.prunable_count > 0) kinds.push_back(MoveKind::Prune);
  if (s.internal_count > 0) kinds.push_back(MoveKind::Change);
  if (s.internal_count >= 2) kinds.push_back(MoveKind::Swap);
  return kinds;
}

Proposal propose(const Tree& tree, const Dataset& data, RngStream& rng) {
  const auto splittable = data.splittable_features();
  if (splittable.empty()) {
    throw DegenerateDatasetError(
        "propose: every feature is constant, no split can be drawn");
  }

  const auto kinds = valid_moves(tree, data);
  const MoveKind kind = kinds[rng.next_index(kinds.size())];
  const double log_kind = -log_of(kinds.size());
  const double log_feat = -log_of(splittable.size());

  Tree next = tree;
  double log_q_fwd = 0.0;
  double log_q_rev = 0.0;

  switch (kind) {
    case MoveKind::Grow: {
      const auto leaves = tree.leaf_ids();
      const int leaf = leaves[rng.next_index(leaves.size())];
      const std::size_t feat = splittable[rng.next_index(splittable.size())];
      const auto cand = data.candidates(feat);
      const double thr = cand[rng.next_index(cand.size())];
      next.grow_at(leaf, static_cast<int>(feat), thr);
      log_q_fwd = log_kind - log_of(leaves.size()) + log_feat - log_of(cand.size());
      // undone by pruning the freshly grown node
      const auto rev_kinds = valid_moves(next, data);
      log_q_rev = -log_of(rev_kinds.size()) - log_of(next.stats().prunable_count);
      break;
    }
    case MoveKind::Prune: {
      const auto prunable = tree.prunable_ids();
      const int target = prunable[rng.next_index(prunable.size())];
      const int old_feat = tree.node(target).feature;
      const std::size_t old_cand_count = data.candidates(old_feat).size();
      next.prune_at(target);
      log_q_fwd = log_kind - log_of(prunable.size());
      // undone by regrowing that leaf with the identical split
      const auto rev_kinds = valid_moves(next, data);
      log_q_rev = -log_of(rev_kinds.size()) - log_of(next.stats().leaf_count) +
                  log_feat - log_of(old_cand_count);
      break;
    }
    case MoveKind::Change: {
      const auto internals = tree.internal_ids();
      const int target = internals[rng.next_index(internals.size())];
      const int old_feat = tree.node(target).feature;
      const std::size_t old_cand_count = data.candidates(old_feat).size();
      const std::size_t feat = splittable[rng.next_index(splittable.size())];
      const auto cand = data.candidates(feat);
      const double thr = cand[rng.next_index(cand.size())];
      next.change_at(target, static_cast<int>(feat), thr);
      log_q_fwd = log_kind - log_of(internals.size()) + log_feat - log_of(cand.size());
      // undone by changing back to the old split; the structure and hence
      // the valid-move set are unchanged
      log_q_rev = log_kind - log_of(internals.size()) + log_feat - log_of(old_cand_count);
      break;
    }
    case MoveKind::Swap: {
      const auto internals = tree.internal_ids();
      const std::size_t m = internals.size();
      const std::size_t i = rng.next_index(m);
      std::size_t j = rng.next_index(m - 1);
      if (j >= i) ++j;
      next.swap_params(internals[i], internals[j]);
      // unordered pair: two ordered draws produce it
      const double log_pair = std::log(2.0) - log_of(m) - log_of(m - 1);
      log_q_fwd = log_kind + log_pair;
      log_q_rev = log_kind + log_pair;
      break;
    }
  }

  // A draw reproducing the source tree is one of several paths to the same
  // outcome, so q aggregates them all; the aggregate is its own reverse.
  if ((kind == MoveKind::Change || kind == MoveKind::Swap) &&
      next.same_structure(tree)) {
    const double agg = self_transition_log_prob(tree, data, kinds);
    log_q_fwd = agg;
    log_q_rev = agg;
  }

  return {kind, std::move(next), log_q_fwd, log_q_rev};
}

std::vector<MoveOutcome> enumerate_moves(const Tree& tree, const Dataset& data) {
  std::vector<MoveOutcome> out;
  const auto kinds = valid_moves(tree, data);
  if (kinds.empty()) return out;

  const auto splittable = data.splittable_features();
  const double log_kind = -log_of(kinds.size());
  const double log_feat =
      splittable.empty() ? 0.0 : -log_of(splittable.size());

  for (MoveKind kind : kinds) {
    switch (kind) {
      case MoveKind::Grow: {
        const auto leaves = tree.leaf_ids();
        for (int leaf : leaves) {
          for (std::size_t feat : splittable) {
            const auto cand = data.candidates(feat);
            for (double thr : cand) {
              Tree next = tree;
              next.grow_at(leaf, static_cast<int>(feat), thr);
              out.push_back({kind, std::move(next),
                             log_kind - log_of(leaves.size()) + log_feat -
                                 log_of(cand.size())});
            }
          }
        }
        break;
      }
      case MoveKind::Prune: {
        const auto prunable = tree.prunable_ids();
        for (int target : prunable) {
          Tree next = tree;
          next.prune_at(target);
          out.push_back({kind, std::move(next), log_kind - log_of(prunable.size())});
        }
        break;
      }
      case MoveKind::Change: {
        const auto internals = tree.internal_ids();
        for (int target : internals) {
          for (std::size_t feat : splittable) {
            const auto cand = data.candidates(feat);
            for (double thr : cand) {
              Tree next = tree;
              next.change_at(target, static_cast<int>(feat), thr);
              out.push_back({kind, std::move(next),
                             log_kind - log_of(internals.size()) + log_feat -
                                 log_of(cand.size())});
            }
          }
        }
        break;
      }
      case MoveKind::Swap: {
        const auto internals = tree.internal_ids();
        const std::size_t m = internals.size();
        const double log_pair = std::log(2.0) - log_of(m) - log_of(m - 1);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = i + 1; j < m; ++j) {
            Tree next = tree;
            next.swap_params(internals[i], internals[j]);
            out.push_back({kind, std::move(next), log_kind + log_pair});
          }
        }
        break;
      }
    }
  }
  return out;
}

std::optional<double> transition_log_prob(const Tree& from, const Tree& to,
                                          const Dataset& data) {
  std::vector<double> matches;
  for (const MoveOutcome& o : enumerate_moves(from, data)) {
    if (o.tree.same_structure(to)) matches.push_back(o.log_prob);
  }
  if (matches.empty()) return std::nullopt;
  return log_sum_exp(matches);
}

}  // namespace bayestree
