#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bayestree/dataset.hpp"
#include "bayestree/model.hpp"
#include "bayestree/rng.hpp"
#include "bayestree/tree.hpp"

using namespace bayestree;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// 6 rows, 1 feature, 2 classes. x in {0,1,2}, candidates {0.5, 1.5}.
Dataset six_rows() {
  return Dataset({0, 0, 1, 1, 2, 2}, 1, {0, 0, 1, 1, 0, 1}, 2);
}

Dataset random_dataset(std::uint64_t seed, std::size_t rows, std::size_t features,
                       int classes) {
  RngStream rng(seed, StreamPurpose::Synthetic, 0, 0);
  std::vector<double> x(rows * features);
  std::vector<int> y(rows);
  for (auto& v : x) v = std::floor(rng.next_double() * 8.0) / 4.0;
  for (std::size_t i = 0; i < rows; ++i) y[i] = static_cast<int>(rng.next_index(classes));
  // guarantee every class shows up
  for (int k = 0; k < classes; ++k) y[k % rows] = k;
  return Dataset(std::move(x), features, std::move(y), classes);
}

Tree random_on_grid_tree(const Dataset& data, std::uint64_t seed, int grows) {
  RngStream rng(seed, StreamPurpose::Init, 1, 0);
  Tree t = Tree::single_leaf(data.class_count());
  const auto feats = data.splittable_features();
  for (int g = 0; g < grows && !feats.empty(); ++g) {
    const auto leaves = t.leaf_ids();
    const int leaf = leaves[rng.next_index(leaves.size())];
    const std::size_t f = feats[rng.next_index(feats.size())];
    const auto cands = data.candidates(f);
    t.grow_at(leaf, static_cast<int>(f), cands[rng.next_index(cands.size())]);
  }
  return fit_leaves(std::move(t), data, 1.0);
}

}  // namespace

TEST_CASE("log_sum_exp: hand values, degenerate inputs, huge magnitudes") {
  const std::vector<double> two{std::log(0.25), std::log(0.75)};
  CHECK(log_sum_exp(two) == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<double> empty;
  CHECK(log_sum_exp(empty) == kNegInf);
  const std::vector<double> allneg{kNegInf, kNegInf};
  CHECK(log_sum_exp(allneg) == kNegInf);

  // values that would overflow exp() directly
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));
  const std::vector<double> mixed{kNegInf, 3.0};
  CHECK(log_sum_exp(mixed) == doctest::Approx(3.0));
  const std::vector<double> one{-42.5};
  CHECK(log_sum_exp(one) == -42.5);
}

TEST_CASE("fit_leaves: smoothed counts on a single leaf") {
  // two rows, one per class, smoothing 1: (1+1)/(2+2) each
  Dataset d({0.0, 1.0}, 1, {0, 1}, 2);
  Tree t = fit_leaves(Tree::single_leaf(2), d, 1.0);
  const auto& p = t.node(t.root()).probs;
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  // counts (3,1), smoothing 1: (4/6, 2/6)
  Dataset d2({0, 1, 2, 3}, 1, {0, 0, 0, 1}, 2);
  Tree t2 = fit_leaves(Tree::single_leaf(2), d2, 1.0);
  CHECK(t2.node(t2.root()).probs[0] == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(t2.node(t2.root()).probs[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("fit_leaves: an empty leaf falls back to uniform") {
  // all rows go left of 0.5; right leaf sees nothing
  Dataset d({0, 0, 0, 0}, 1, {0, 1, 2, 3}, 4);
  Tree t = Tree::single_leaf(4);
  t.grow_at(t.root(), 0, 0.5);
  // force an off-grid threshold so every row lands left
  t.change_at(t.root(), 0, 5.0);
  t = fit_leaves(std::move(t), d, 1.0);
  const auto& right = t.node(t.node(t.root()).right).probs;
  REQUIRE(right.size() == 4);
  for (double p : right) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("fit_leaves: probabilities always satisfy the simplex invariant") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset d = random_dataset(seed, 37, 2, 3);
    Tree t = random_on_grid_tree(d, seed, 3);
    CHECK(!t.validate().has_value());
    for (int leaf : t.leaf_ids()) {
      double sum = 0.0;
      for (double p : t.node(leaf).probs) sum += p;
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
  Dataset d = six_rows();
  CHECK_THROWS_AS(fit_leaves(Tree::single_leaf(2), d, -0.5), std::invalid_argument);
}

TEST_CASE("log_likelihood: four rows at an even leaf give 4*log(1/2)") {
  Dataset d({0, 1, 2, 3}, 1, {0, 1, 0, 1}, 2);
  const Tree t = fit_leaves(Tree::single_leaf(2), d, 0.0);
  CHECK(log_likelihood(t, d) == doctest::Approx(4.0 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("log_likelihood: certain classification scores exactly zero") {
  Dataset d({0, 1}, 1, {0, 1}, 2);
  Tree t = Tree::single_leaf(2);
  t.grow_at(t.root(), 0, 0.5);
  t = fit_leaves(std::move(t), d, 0.0);  // raw frequencies: each leaf pure
  CHECK(log_likelihood(t, d) == 0.0);
}

TEST_CASE("log_likelihood: a zero-probability observation yields -infinity, not NaN") {
  Dataset d({0, 1}, 1, {0, 1}, 2);
  Tree t = Tree::single_leaf(2);
  t.set_leaf_probs(t.root(), {1.0, 0.0});
  const double ll = log_likelihood(t, d);
  CHECK(ll == kNegInf);
  CHECK(!std::isnan(ll));
}

TEST_CASE("log_likelihood: depth-1 tree against a hand-computed oracle") {
  Dataset d = six_rows();
  Tree t = Tree::single_leaf(2);
  t.grow_at(t.root(), 0, 0.5);
  t = fit_leaves(std::move(t), d, 1.0);

  // left leaf (x <= 0.5): rows {0,1}, labels {0,0} -> probs (3/4, 1/4)
  // right leaf: rows {2..5}, labels {1,1,0,1} -> probs (2/6, 4/6)
  const double expected = 2.0 * std::log(3.0 / 4.0)            // rows 0,1
                          + 2.0 * std::log(4.0 / 6.0)          // rows 2,3
                          + std::log(2.0 / 6.0)                // row 4
                          + std::log(4.0 / 6.0);               // row 5
  CHECK(log_likelihood(t, d) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("log_likelihood: invariant under row permutation") {
  Dataset d = random_dataset(3, 50, 2, 3);
  std::vector<std::size_t> perm(50);
  for (std::size_t i = 0; i < 50; ++i) perm[i] = i;
  RngStream rng(9, StreamPurpose::Init, 0, 0);
  for (std::size_t i = 49; i > 0; --i) std::swap(perm[i], perm[rng.next_index(i + 1)]);
  const Dataset shuffled = d.subset(perm);

  Tree t = random_on_grid_tree(d, 4, 3);
  CHECK(log_likelihood(t, d) == doctest::Approx(log_likelihood(t, shuffled)).epsilon(1e-12));
}

TEST_CASE("log_param_prior: uniform over features and candidate grids") {
  Dataset d = Dataset({0, 10, 1, 20, 2, 30, 3, 40, 4, 50, 5, 60}, 2,
                      {0, 1, 0, 1, 0, 1}, 2);
  // feature 0: 6 uniques -> 5 candidates; feature 1: 6 uniques -> 5 candidates
  Tree leaf = Tree::single_leaf(2);
  CHECK(log_param_prior(leaf, d) == 0.0);  // no internal nodes

  Tree t = leaf;
  t.grow_at(t.root(), 0, 0.5);
  CHECK(log_param_prior(t, d) ==
        doctest::Approx(std::log(0.5) + std::log(0.2)).epsilon(1e-12));

  // second internal node multiplies in another factor
  t.grow_at(t.node(t.root()).right, 1, 15.0);
  CHECK(log_param_prior(t, d) ==
        doctest::Approx(2.0 * (std::log(0.5) + std::log(0.2))).epsilon(1e-12));
}

TEST_CASE("log_param_prior: off-grid thresholds zero out the tree") {
  Dataset d = six_rows();
  Tree t = Tree::single_leaf(2);
  t.grow_at(t.root(), 0, 0.7);  // not a midpoint of {0,1,2}
  CHECK(log_param_prior(t, d) == kNegInf);

  Tree ok = Tree::single_leaf(2);
  ok.grow_at(ok.root(), 0, 1.5);
  CHECK(std::isfinite(log_param_prior(ok, d)));
}

TEST_CASE("log_tree_prior: depth penalty values") {
  Hyperparams hp;
  hp.a = 0.25;
  hp.beta = 0.0;
  const Tree leaf = Tree::single_leaf(2);
  CHECK(log_tree_prior(leaf, hp) == doctest::Approx(std::log(0.25)).epsilon(1e-12));

  hp.a = 1.0;
  hp.beta = 2.0;
  Tree t = Tree::single_leaf(2);
  t.grow_at(t.root(), 0, 0.5);
  t.grow_at(t.node(t.root()).left, 0, 1.5);
  t.grow_at(t.node(t.node(t.root()).left).left, 0, 2.5);  // depth 3
  CHECK(log_tree_prior(t, hp) == doctest::Approx(-2.0 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("log_joint: sums the three terms and short-circuits zeros") {
  Dataset d = six_rows();
  Hyperparams hp;
  hp.a = 0.8;
  hp.beta = 1.5;

  Tree t = Tree::single_leaf(2);
  t.grow_at(t.root(), 0, 1.5);
  t = fit_leaves(std::move(t), d, 1.0);
  const double expected =
      log_likelihood(t, d) + log_param_prior(t, d) + log_tree_prior(t, hp);
  CHECK(log_joint(t, d, hp) == doctest::Approx(expected).epsilon(1e-12));

  Tree off = Tree::single_leaf(2);
  off.grow_at(off.root(), 0, 0.7);
  off = fit_leaves(std::move(off), d, 1.0);
  CHECK(log_joint(off, d, hp) == kNegInf);
}

TEST_CASE("log_joint: differences never depend on the normalization constant a") {
  Dataset d = random_dataset(11, 60, 2, 3);
  Hyperparams hp1;
  hp1.a = 1.0;
  hp1.beta = 1.0;
  Hyperparams hp7 = hp1;
  hp7.a = 7.0;

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tree t1 = random_on_grid_tree(d, 2 * seed, 2);
    const Tree t2 = random_on_grid_tree(d, 2 * seed + 1, 3);
    const double diff1 = log_joint(t1, d, hp1) - log_joint(t2, d, hp1);
    const double diff7 = log_joint(t1, d, hp7) - log_joint(t2, d, hp7);
    CHECK(diff1 == doctest::Approx(diff7).epsilon(1e-12));
  }
}

TEST_CASE("partition: even split with remainder spread over the first shards") {
  const Partition p = Partition::even(101, 4);
  REQUIRE(p.shards.size() == 4);
  CHECK(p.shards[0].end - p.shards[0].begin == 26);
  CHECK(p.shards[1].end - p.shards[1].begin == 25);
  CHECK(p.shards[2].end - p.shards[2].begin == 25);
  CHECK(p.shards[3].end - p.shards[3].begin == 25);
  // contiguous cover
  CHECK(p.shards[0].begin == 0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(p.shards[i].begin == p.shards[i - 1].end);
  CHECK(p.shards[3].end == 101);

  CHECK_THROWS_AS(Partition::even(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(Partition::even(3, 0), std::invalid_argument);
  const Partition one = Partition::even(5, 1);
  REQUIRE(one.shards.size() == 1);
  CHECK(one.shards[0].end == 5);
}

TEST_CASE("partitioned_log_likelihood: one shard reproduces the sequential value bitwise") {
  Dataset d = random_dataset(21, 101, 2, 3);
  const Tree t = random_on_grid_tree(d, 21, 3);
  const double seq = log_likelihood(t, d);
  const double part = partitioned_log_likelihood(t, d, Partition::even(d.rows(), 1));
  CHECK(part == seq);  // bitwise, not approximate
}

TEST_CASE("partitioned_log_likelihood: agrees across shard counts within 1e-10") {
  Dataset d = random_dataset(22, 101, 2, 3);
  const Tree t = random_on_grid_tree(d, 22, 3);
  const double seq = log_likelihood(t, d);
  for (unsigned c : {2u, 4u, 7u, 101u}) {
    const double part = partitioned_log_likelihood(t, d, Partition::even(d.rows(), c));
    CHECK(std::abs(part - seq) <= 1e-10);
  }
}

TEST_CASE("partitioned_log_likelihood: random shard counts on random data") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    RngStream rng(seed, StreamPurpose::Folds, 5, 0);
    const std::size_t rows = 20 + rng.next_index(300);
    Dataset d = random_dataset(100 + seed, rows, 1 + rng.next_index(3), 2);
    const Tree t = random_on_grid_tree(d, 200 + seed, 2);
    const double seq = log_likelihood(t, d);
    const unsigned c =
        1 + static_cast<unsigned>(rng.next_index(std::min<std::size_t>(rows, 64)));
    const double part = partitioned_log_likelihood(t, d, Partition::even(rows, c));
    CHECK(std::abs(part - seq) <= 1e-10);
  }
}

TEST_CASE("partitioned_log_joint: adds the same priors on top") {
  Dataset d = random_dataset(31, 64, 2, 2);
  const Tree t = random_on_grid_tree(d, 31, 2);
  Hyperparams hp;
  hp.a = 1.0;
  hp.beta = 1.0;
  const Partition p = Partition::even(d.rows(), 4);
  const double expected =
      partitioned_log_likelihood(t, d, p) + log_param_prior(t, d) + log_tree_prior(t, hp);
  CHECK(partitioned_log_joint(t, d, hp, p) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(partitioned_log_joint(t, d, hp, Partition::even(d.rows(), 1)) ==
        log_joint(t, d, hp));
}
