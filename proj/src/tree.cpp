#include "bayestree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace bayestree {

Tree Tree::single_leaf(int class_count) {
  if (class_count < 2) {
    throw std::invalid_argument("single_leaf: need at least 2 classes");
  }
  Tree t;
  Node leaf;
  leaf.probs.assign(class_count, 1.0 / class_count);
  t.nodes_.push_back(std::move(leaf));
  t.root_ = 0;
  return t;
}

int Tree::descend(std::span<const double> x) const {
  int id = root_;
  while (!nodes_[id].is_leaf()) {
    const Node& n = nodes_[id];
    id = (x[n.feature] <= n.threshold) ? n.left : n.right;
  }
  return id;
}

TreeStats Tree::stats() const {
  TreeStats s;
  std::vector<std::pair<int, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    const auto [id, depth] = stack.back();
    stack.pop_back();
    const Node& n = nodes_[id];
    if (n.is_leaf()) {
      s.leaf_count += 1;
      s.depth = std::max(s.depth, depth);
    } else {
      s.internal_count += 1;
      if (nodes_[n.left].is_leaf() && nodes_[n.right].is_leaf()) {
        s.prunable_count += 1;
      }
      stack.emplace_back(n.right, depth + 1);
      stack.emplace_back(n.left, depth + 1);
    }
  }
  return s;
}

namespace {

template <typename Pred>
std::vector<int> collect_preorder(const std::vector<Node>& nodes, int root,
                                  Pred keep) {
  std::vector<int> out;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (keep(nodes[id])) out.push_back(id);
    if (!nodes[id].is_leaf()) {
      stack.push_back(nodes[id].right);
      stack.push_back(nodes[id].left);
    }
  }
  return out;
}

}  // namespace

std::vector<int> Tree::leaf_ids() const {
  return collect_preorder(nodes_, root_,
                          [](const Node& n) { return n.is_leaf(); });
}

std::vector<int> Tree::internal_ids() const {
  return collect_preorder(nodes_, root_,
                          [](const Node& n) { return !n.is_leaf(); });
}

std::vector<int> Tree::prunable_ids() const {
  return collect_preorder(nodes_, root_, [this](const Node& n) {
    return !n.is_leaf() && nodes_[n.left].is_leaf() && nodes_[n.right].is_leaf();
  });
}

void Tree::grow_at(int leaf_id, int feature, double threshold) {
  if (leaf_id < 0 || static_cast<std::size_t>(leaf_id) >= nodes_.size() ||
      !nodes_[leaf_id].is_leaf()) {
    throw std::invalid_argument("grow_at: target is not a leaf");
  }
  if (feature < 0) throw std::invalid_argument("grow_at: bad feature");

  Node child;
  child.probs = nodes_[leaf_id].probs;
  const int left = static_cast<int>(nodes_.size());
  nodes_.push_back(child);
  const int right = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(child));

  Node& n = nodes_[leaf_id];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  n.probs.clear();
}

void Tree::remove_slot(int slot) {
  const int last = static_cast<int>(nodes_.size()) - 1;
  if (slot != last) {
    nodes_[slot] = std::move(nodes_[last]);
    for (Node& m : nodes_) {
      if (m.left == last) m.left = slot;
      if (m.right == last) m.right = slot;
    }
    if (root_ == last) root_ = slot;
  }
  nodes_.pop_back();
}

void Tree::prune_at(int internal_id) {
  if (internal_id < 0 ||
      static_cast<std::size_t>(internal_id) >= nodes_.size() ||
      nodes_[internal_id].is_leaf()) {
    throw std::invalid_argument("prune_at: target is not internal");
  }
  const int left = nodes_[internal_id].left;
  const int right = nodes_[internal_id].right;
  if (!nodes_[left].is_leaf() || !nodes_[right].is_leaf()) {
    throw std::invalid_argument("prune_at: children must both be leaves");
  }

  Node& n = nodes_[internal_id];
  n.probs = nodes_[left].probs;
  n.feature = -1;
  n.threshold = 0.0;
  n.left = -1;
  n.right = -1;

  // discard the two orphaned slots, higher index first so the lower index
  // stays valid through the first swap-remove
  remove_slot(std::max(left, right));
  remove_slot(std::min(left, right));
}

void Tree::change_at(int internal_id, int feature, double threshold) {
  if (internal_id < 0 ||
      static_cast<std::size_t>(internal_id) >= nodes_.size() ||
      nodes_[internal_id].is_leaf()) {
    throw std::invalid_argument("change_at: target is not internal");
  }
  if (feature < 0) throw std::invalid_argument("change_at: bad feature");
  nodes_[internal_id].feature = feature;
  nodes_[internal_id].threshold = threshold;
}

void Tree::swap_params(int id_a, int id_b) {
  if (id_a == id_b) throw std::invalid_argument("swap_params: identical nodes");
  for (int id : {id_a, id_b}) {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size() ||
        nodes_[id].is_leaf()) {
      throw std::invalid_argument("swap_params: both nodes must be internal");
    }
  }
  std::swap(nodes_[id_a].feature, nodes_[id_b].feature);
  std::swap(nodes_[id_a].threshold, nodes_[id_b].threshold);
}

void Tree::set_leaf_probs(int leaf_id, std::vector<double> probs) {
  if (leaf_id < 0 || static_cast<std::size_t>(leaf_id) >= nodes_.size() ||
      !nodes_[leaf_id].is_leaf()) {
    throw std::invalid_argument("set_leaf_probs: target is not a leaf");
  }
  if (probs.empty()) throw std::invalid_argument("set_leaf_probs: empty vector");
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("set_leaf_probs: probabilities must be finite and non-negative");
    }
  }
  nodes_[leaf_id].probs = std::move(probs);
}

std::optional<std::string> Tree::validate() const {
  if (nodes_.empty()) return "empty arena";
  if (root_ < 0 || static_cast<std::size_t>(root_) >= nodes_.size()) {
    return "root id out of range";
  }

  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack{root_};
  std::size_t reached = 0;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (seen[id]) return "node " + std::to_string(id) + " reached twice";
    seen[id] = 1;
    reached += 1;

    const Node& n = nodes_[id];
    if ((n.left < 0) != (n.right < 0)) {
      return "node " + std::to_string(id) + " has exactly one child";
    }
    if (n.is_leaf()) {
      if (n.probs.empty()) return "leaf " + std::to_string(id) + " has no probabilities";
      double sum = 0.0;
      for (double p : n.probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
          return "leaf " + std::to_string(id) + " has a bad probability";
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        return "leaf " + std::to_string(id) + " probabilities do not sum to 1";
      }
    } else {
      if (n.feature < 0) return "internal node " + std::to_string(id) + " has no split";
      for (int child : {n.left, n.right}) {
        if (child < 0 || static_cast<std::size_t>(child) >= nodes_.size()) {
          return "node " + std::to_string(id) + " has a child out of range";
        }
        stack.push_back(child);
      }
    }
  }
  if (reached != nodes_.size()) {
    return "arena holds " + std::to_string(nodes_.size() - reached) +
           " unreachable node(s)";
  }
  return std::nullopt;
}

bool Tree::same_structure(const Tree& other) const {
  std::vector<std::pair<int, int>> stack{{root_, other.root_}};
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    const Node& na = nodes_[a];
    const Node& nb = other.nodes_[b];
    if (na.is_leaf() != nb.is_leaf()) return false;
    if (na.is_leaf()) continue;
    if (na.feature != nb.feature || na.threshold != nb.threshold) return false;
    stack.emplace_back(na.left, nb.left);
    stack.emplace_back(na.right, nb.right);
  }
  return true;
}

std::string Tree::canonical_key() const {
  std::string out;
  out.reserve(nodes_.size() * 8);
  append_key(out, root_);
  return out;
}

void Tree::append_key(std::string& out, int id) const {
  const Node& n = nodes_[id];
  if (n.is_leaf()) {
    out += 'L';
    return;
  }
  char buf[40];
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(n.threshold));
  std::memcpy(&bits, &n.threshold, sizeof(bits));
  std::snprintf(buf, sizeof(buf), "I%d:%016llx(", n.feature,
                static_cast<unsigned long long>(bits));
  out += buf;
  append_key(out, n.left);
  out += ")(";
  append_key(out, n.right);
  out += ')';
}

}  // namespace bayestree
