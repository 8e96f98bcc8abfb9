#include "bayestree/serialize.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

namespace bayestree {

using nlohmann::json;

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const Node& n = tree.node(static_cast<int>(id));
    if (n.is_leaf()) {
      nodes.push_back({{"kind", "leaf"}, {"probs", n.probs}});
    } else {
      nodes.push_back({{"kind", "internal"},
                       {"feature", n.feature},
                       {"threshold", n.threshold},
                       {"children", {n.left, n.right}}});
    }
  }
  return {{"root", tree.root()}, {"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& j) {
  const auto& jnodes = j.at("nodes");
  if (!jnodes.is_array() || jnodes.empty()) {
    throw std::runtime_error("tree json: nodes must be a non-empty array");
  }

  // rebuild by replaying grows in a root-first traversal, then restore leaf
  // probabilities; this keeps Tree's arena construction private
  struct Raw {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> probs;
  };
  std::vector<Raw> raw(jnodes.size());
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const auto& jn = jnodes[i];
    const std::string kind = jn.at("kind").get<std::string>();
    if (kind == "leaf") {
      raw[i].probs = jn.at("probs").get<std::vector<double>>();
      if (raw[i].probs.empty()) {
        throw std::runtime_error("tree json: leaf without probabilities");
      }
    } else if (kind == "internal") {
      raw[i].leaf = false;
      raw[i].feature = jn.at("feature").get<int>();
      raw[i].threshold = jn.at("threshold").get<double>();
      const auto& ch = jn.at("children");
      if (!ch.is_array() || ch.size() != 2) {
        throw std::runtime_error("tree json: internal node needs 2 children");
      }
      raw[i].left = ch[0].get<int>();
      raw[i].right = ch[1].get<int>();
    } else {
      throw std::runtime_error("tree json: unknown node kind '" + kind + "'");
    }
  }

  const int root = j.at("root").get<int>();
  const int n = static_cast<int>(raw.size());
  if (root < 0 || root >= n) throw std::runtime_error("tree json: root out of range");

  // class count from any leaf
  std::size_t k = 0;
  for (const Raw& r : raw) {
    if (r.leaf) {
      k = r.probs.size();
      break;
    }
  }
  if (k < 2) throw std::runtime_error("tree json: need leaves with >= 2 classes");

  Tree tree = Tree::single_leaf(static_cast<int>(k));
  // walk the stored structure and grow the live tree in lockstep
  struct Visit {
    int stored;  // index into raw
    int live;    // node id in tree
  };
  std::vector<Visit> stack{{root, tree.root()}};
  std::vector<std::pair<int, int>> leaf_fixups;  // (live id, stored index)
  while (!stack.empty()) {
    const auto [stored, live] = stack.back();
    stack.pop_back();
    const Raw& r = raw[stored];
    if (r.leaf) {
      leaf_fixups.emplace_back(live, stored);
      continue;
    }
    if (r.left < 0 || r.left >= n || r.right < 0 || r.right >= n) {
      throw std::runtime_error("tree json: child index out of range");
    }
    tree.grow_at(live, r.feature, r.threshold);
    const Node& grown = tree.node(live);
    stack.push_back({r.right, grown.right});
    stack.push_back({r.left, grown.left});
  }
  for (const auto& [live, stored] : leaf_fixups) {
    tree.set_leaf_probs(live, raw[stored].probs);
  }

  if (const auto why = tree.validate()) {
    throw std::runtime_error("tree json: rebuilt tree invalid: " + *why);
  }
  return tree;
}

json sample_to_json(const PosteriorSample& sample, const json& config_echo) {
  json trees = json::array();
  for (const RetainedTree& rt : sample.trees) {
    json entry = tree_to_json(rt.tree);
    entry["iteration"] = rt.iteration;
    entry["log_joint"] = rt.log_joint;
    trees.push_back(std::move(entry));
  }
  return {{"format_version", kSampleFormatVersion},
          {"config", config_echo},
          {"trees", std::move(trees)}};
}

LoadedSample sample_from_json(const json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kSampleFormatVersion) {
    throw std::runtime_error("sample file: unsupported format version " +
                             std::to_string(version));
  }
  LoadedSample loaded;
  loaded.config = j.value("config", json::object());
  for (const auto& entry : j.at("trees")) {
    RetainedTree rt;
    rt.tree = tree_from_json(entry);
    rt.iteration = entry.value("iteration", std::uint64_t{0});
    rt.log_joint = entry.value("log_joint", 0.0);
    loaded.sample.trees.push_back(std::move(rt));
  }
  return loaded;
}

void write_sample_file(const std::filesystem::path& path,
                       const PosteriorSample& sample,
                       const json& config_echo) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write sample file: " + path.string());
  }
  // emit tree by tree; building one document for a long run would hold every
  // retained tree in memory twice
  out << "{\n  \"format_version\": " << kSampleFormatVersion << ",\n";
  out << "  \"config\": " << config_echo.dump() << ",\n";
  out << "  \"trees\": [";
  bool first = true;
  for (const RetainedTree& rt : sample.trees) {
    json entry = tree_to_json(rt.tree);
    entry["iteration"] = rt.iteration;
    entry["log_joint"] = rt.log_joint;
    out << (first ? "\n    " : ",\n    ") << entry.dump();
    first = false;
  }
  out << "\n  ]\n}\n";
  if (!out) {
    throw std::runtime_error("failed writing sample file: " + path.string());
  }
}

LoadedSample read_sample_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read sample file: " + path.string());
  }
  json j;
  in >> j;
  return sample_from_json(j);
}

}  // namespace bayestree
