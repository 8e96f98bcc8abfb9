#include "bayestree/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bayestree/parallel.hpp"

namespace bayestree {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log probs per arena slot, leaves only; shared by both likelihood paths so
// the sequential and partitioned sums see bit-identical per-row terms.
std::vector<std::vector<double>> leaf_log_probs(const Tree& tree) {
  std::vector<std::vector<double>> logp(tree.size());
  for (int id : tree.leaf_ids()) {
    const auto& probs = tree.node(id).probs;
    auto& lp = logp[id];
    lp.reserve(probs.size());
    for (double p : probs) lp.push_back(std::log(p));
  }
  return logp;
}

double row_range_log_sum(const Tree& tree, const Dataset& data,
                         const std::vector<std::vector<double>>& logp,
                         std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const int leaf = tree.descend(data.row(i));
    acc += logp[leaf][data.label(i)];
  }
  return acc;
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

Tree fit_leaves(Tree tree, const Dataset& data, double smoothing) {
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw std::invalid_argument("fit_leaves: smoothing must be >= 0 and finite");
  }
  const int k = data.class_count();

  std::vector<std::vector<double>> counts(tree.size());
  for (int id : tree.leaf_ids()) counts[id].assign(k, 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    counts[tree.descend(data.row(i))][data.label(i)] += 1.0;
  }

  for (int id : tree.leaf_ids()) {
    const auto& cnt = counts[id];
    double n = 0.0;
    for (double c : cnt) n += c;

    std::vector<double> probs(k);
    if (n == 0.0) {
      probs.assign(k, 1.0 / k);
    } else {
      const double denom = n + k * smoothing;
      double sum = 0.0;
      for (int j = 0; j < k; ++j) {
        probs[j] = (cnt[j] + smoothing) / denom;
        sum += probs[j];
      }
      // exact simplex regardless of rounding in the division above
      for (int j = 0; j < k; ++j) probs[j] /= sum;
    }
    tree.set_leaf_probs(id, std::move(probs));
  }
  return tree;
}

double log_likelihood(const Tree& tree, const Dataset& data) {
  const auto logp = leaf_log_probs(tree);
  return row_range_log_sum(tree, data, logp, 0, data.rows());
}

double log_param_prior(const Tree& tree, const Dataset& data) {
  const double log_feature_choice = -std::log(static_cast<double>(data.feature_count()));
  double acc = 0.0;
  for (int id : tree.internal_ids()) {
    const Node& n = tree.node(id);
    const auto cand = data.candidates(n.feature);
    if (!data.on_candidate_grid(n.feature, n.threshold)) return kNegInf;
    acc += log_feature_choice - std::log(static_cast<double>(cand.size()));
  }
  return acc;
}

double log_tree_prior(const Tree& tree, const Hyperparams& hp) {
  const double depth = static_cast<double>(tree.stats().depth);
  return std::log(hp.a) - hp.beta * std::log1p(depth);
}

double log_joint(const Tree& tree, const Dataset& data, const Hyperparams& hp) {
  const double lp = log_param_prior(tree, data);
  if (lp == kNegInf) return kNegInf;
  const double ll = log_likelihood(tree, data);
  if (ll == kNegInf) return kNegInf;
  return ll + lp + log_tree_prior(tree, hp);
}

Partition Partition::even(std::size_t rows, unsigned shard_count) {
  if (rows == 0) throw std::invalid_argument("partition: no rows");
  if (shard_count == 0) throw std::invalid_argument("partition: no shards");
  if (static_cast<std::size_t>(shard_count) > rows) {
    throw std::invalid_argument("partition: more shards than rows");
  }
  Partition p;
  p.shards.reserve(shard_count);
  const std::size_t base = rows / shard_count;
  const std::size_t extra = rows % shard_count;
  std::size_t begin = 0;
  for (unsigned s = 0; s < shard_count; ++s) {
    const std::size_t len = base + (s < extra ? 1 : 0);
    p.shards.push_back({begin, begin + len});
    begin += len;
  }
  return p;
}

double partitioned_log_likelihood(const Tree& tree, const Dataset& data,
                                  const Partition& part) {
  if (part.shards.empty()) {
    throw std::invalid_argument("partitioned_log_likelihood: empty partition");
  }
  const auto logp = leaf_log_probs(tree);
  const auto partials = parallel_map_ordered<double>(
      part.shards.size(), static_cast<unsigned>(part.shards.size()),
      [&](std::size_t s) {
        const auto& range = part.shards[s];
        return row_range_log_sum(tree, data, logp, range.begin, range.end);
      });
  double acc = 0.0;
  for (double p : partials) acc += p;
  return acc;
}

double partitioned_log_joint(const Tree& tree, const Dataset& data,
                             const Hyperparams& hp, const Partition& part) {
  const double lp = log_param_prior(tree, data);
  if (lp == kNegInf) return kNegInf;
  const double ll = partitioned_log_likelihood(tree, data, part);
  if (ll == kNegInf) return kNegInf;
  return ll + lp + log_tree_prior(tree, hp);
}

}  // namespace bayestree
