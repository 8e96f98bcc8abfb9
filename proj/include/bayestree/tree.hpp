#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bayestree {

// Arena slot. Leaves have feature == -1 and no children; internal nodes have
// exactly two children and carry a split (feature, threshold). Class
// probabilities live on leaves only.
struct Node {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> probs;

  bool is_leaf() const { return left < 0; }
};

struct TreeStats {
  std::size_t depth = 0;
  std::size_t leaf_count = 0;
  std::size_t internal_count = 0;
  // internal nodes whose children are both leaves
  std::size_t prunable_count = 0;
};

// Binary classification tree over an arena of nodes. Value semantics: copies
// are deep and structural edits touch only the copy they are applied to.
// Node ids are arena positions and are only stable until the next prune.
class Tree {
 public:
  // One leaf holding the uniform distribution over class_count classes.
  static Tree single_leaf(int class_count);

  int root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[id]; }

  // Leaf id reached by routing x down from the root; ties on the threshold
  // go left (x[feature] <= threshold).
  int descend(std::span<const double> x) const;

  TreeStats stats() const;

  // Node ids in preorder, filtered. Order is deterministic, which makes
  // uniform draws over these lists reproducible.
  std::vector<int> leaf_ids() const;
  std::vector<int> internal_ids() const;
  std::vector<int> prunable_ids() const;

  // Structural edits used by the proposal kernels. Preconditions are
  // enforced with std::invalid_argument. Fresh leaves inherit the replaced
  // leaf's probabilities so the tree stays valid until the next refit.
  void grow_at(int leaf_id, int feature, double threshold);
  void prune_at(int internal_id);  // both children must be leaves
  void change_at(int internal_id, int feature, double threshold);
  void swap_params(int id_a, int id_b);

  void set_leaf_probs(int leaf_id, std::vector<double> probs);

  // First violated structural invariant, or nullopt when the tree is sound:
  // single root, every arena slot reachable exactly once, internal nodes
  // binary, leaf probabilities a simplex within 1e-12.
  std::optional<std::string> validate() const;

  // Compares split structure and parameters, ignoring leaf probabilities.
  bool same_structure(const Tree& other) const;

  // Preorder fingerprint of structure and split parameters (threshold bits
  // rendered exactly). Equal keys iff same_structure.
  std::string canonical_key() const;

 private:
  void remove_slot(int slot);
  void append_key(std::string& out, int id) const;

  std::vector<Node> nodes_;
  int root_ = 0;
};

}  // namespace bayestree
