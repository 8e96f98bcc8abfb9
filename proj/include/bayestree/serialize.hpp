#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bayestree/samplers.hpp"
#include "bayestree/tree.hpp"

namespace bayestree {

inline constexpr int kSampleFormatVersion = 1;

// Nodes in arena order; internal nodes as {kind, feature, threshold,
// children}, leaves as {kind, probs}.
nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);

// Retained-sample document: format version, config echo, tree list with
// iteration tags and log joints.
nlohmann::json sample_to_json(const PosteriorSample& sample,
                              const nlohmann::json& config_echo);

struct LoadedSample {
  PosteriorSample sample;
  nlohmann::json config;
};
LoadedSample sample_from_json(const nlohmann::json& j);

void write_sample_file(const std::filesystem::path& path,
                       const PosteriorSample& sample,
                       const nlohmann::json& config_echo);
LoadedSample read_sample_file(const std::filesystem::path& path);

}  // namespace bayestree
