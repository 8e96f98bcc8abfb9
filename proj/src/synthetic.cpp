#include "bayestree/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bayestree/rng.hpp"
#include "bayestree/tree.hpp"

namespace bayestree {

namespace {

constexpr double kLabelNoise = 0.25;
// features take a fixed number of ordinal levels, like integer-coded
// attributes in real tables; keeps the split-candidate grids small enough
// for samplers to localize boundaries instead of diffusing over thousands
// of near-duplicate thresholds
constexpr std::size_t kFeatureLevels = 16;

std::size_t target_leaves(int classes) {
  // every class owns at least one region, plus one extra region when two
  // classes would otherwise tile a single split; small enough that samplers
  // reach the posterior bulk quickly instead of being judged on search luck
  return std::max<std::size_t>(3, static_cast<std::size_t>(classes));
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.rows < static_cast<std::size_t>(spec.classes)) {
    throw std::invalid_argument("synthetic: need at least one row per class");
  }
  if (spec.features == 0) {
    throw std::invalid_argument("synthetic: need at least one feature");
  }
  if (spec.classes < 2) {
    throw std::invalid_argument("synthetic: need at least two classes");
  }

  const std::size_t leaves_wanted = target_leaves(spec.classes);

  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt == 1000) {
      throw std::runtime_error("synthetic: failed to cover every class");
    }
    RngStream rng(spec.seed, StreamPurpose::Synthetic, attempt, 0);

    std::vector<double> features(spec.rows * spec.features);
    for (double& v : features) {
      v = (static_cast<double>(rng.next_index(kFeatureLevels)) + 0.5) /
          static_cast<double>(kFeatureLevels);
    }

    // hidden tree; each node splits near the middle of the interval it
    // actually covers, so every leaf keeps a healthy share of the rows and
    // the planted boundaries stay recoverable
    Tree hidden = Tree::single_leaf(spec.classes);
    std::vector<std::vector<std::pair<double, double>>> box(
        1, std::vector<std::pair<double, double>>(spec.features, {0.0, 1.0}));
    std::vector<int> split_feat(1, -1);
    while (hidden.leaf_ids().size() < leaves_wanted) {
      // split the roomiest region; avoid re-splitting the parent's feature so
      // the planted regions form a grid rather than a staircase, which would
      // need the splits found in order and measure search luck instead of
      // sampler quality
      int leaf = -1;
      double best_volume = -1.0;
      for (int cand : hidden.leaf_ids()) {
        double volume = 1.0;
        for (const auto& [lo, hi] : box[static_cast<std::size_t>(cand)]) {
          volume *= hi - lo;
        }
        if (volume > best_volume) {
          best_volume = volume;
          leaf = cand;
        }
      }
      int feat = static_cast<int>(rng.next_index(spec.features));
      if (spec.features > 1) {
        while (feat == split_feat[static_cast<std::size_t>(leaf)]) {
          feat = static_cast<int>(rng.next_index(spec.features));
        }
      }
      const auto [lo, hi] = box[static_cast<std::size_t>(leaf)][feat];
      const double thr = lo + (0.4 + 0.2 * rng.next_double()) * (hi - lo);
      hidden.grow_at(leaf, feat, thr);
      box.resize(hidden.size());
      split_feat.resize(hidden.size(), -1);
      const Node& n = hidden.node(leaf);
      const auto parent_box = box[static_cast<std::size_t>(leaf)];
      box[static_cast<std::size_t>(n.left)] = parent_box;
      box[static_cast<std::size_t>(n.left)][feat].second = thr;
      box[static_cast<std::size_t>(n.right)] = parent_box;
      box[static_cast<std::size_t>(n.right)][feat].first = thr;
      split_feat[static_cast<std::size_t>(n.left)] = feat;
      split_feat[static_cast<std::size_t>(n.right)] = feat;
    }

    // leaf -> class map; shuffled class order, cycled over the leaves
    const auto leaves = hidden.leaf_ids();
    std::vector<int> class_order(spec.classes);
    for (int k = 0; k < spec.classes; ++k) class_order[k] = k;
    for (std::size_t i = class_order.size(); i > 1; --i) {
      std::swap(class_order[i - 1], class_order[rng.next_index(i)]);
    }
    std::vector<int> leaf_class(hidden.size(), 0);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      leaf_class[leaves[i]] = class_order[i % class_order.size()];
    }

    std::vector<int> labels(spec.rows);
    std::vector<char> covered(spec.classes, 0);
    for (std::size_t i = 0; i < spec.rows; ++i) {
      std::span<const double> x{features.data() + i * spec.features,
                                spec.features};
      int label = leaf_class[hidden.descend(x)];
      if (rng.next_double() < kLabelNoise) {
        label = static_cast<int>(rng.next_index(spec.classes));
      }
      labels[i] = label;
      covered[label] = 1;
    }

    if (std::find(covered.begin(), covered.end(), 0) == covered.end()) {
      return Dataset(std::move(features), spec.features, std::move(labels),
                     spec.classes);
    }
  }
}

std::optional<SyntheticSpec> preset_synthetic(const std::string& name,
                                              std::uint64_t seed) {
  std::string key;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
  }

  std::size_t rows = 0;
  std::size_t features = 0;
  if (key.size() != 4) return std::nullopt;
  const std::string row_class = key.substr(0, 2);
  const std::string feat_class = key.substr(2, 2);

  if (row_class == "SD") rows = 2000;
  else if (row_class == "MD") rows = 20000;
  else if (row_class == "BD") rows = 200000;
  else return std::nullopt;

  if (feat_class == "SF") features = 8;
  else if (feat_class == "BF") features = 64;
  else return std::nullopt;

  SyntheticSpec spec;
  spec.rows = rows;
  spec.features = features;
  spec.classes = 3;
  spec.seed = seed;
  return spec;
}

}  // namespace bayestree
