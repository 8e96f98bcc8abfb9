#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "bayestree/dataset.hpp"

namespace bayestree {

struct SyntheticSpec {
  std::size_t rows = 0;
  std::size_t features = 0;
  int classes = 2;
  std::uint64_t seed = 0;
};

// Planted-tree data: ordinal features on a fixed grid in [0,1), labels
// assigned by a hidden random tree with one region per class and 25% of
// labels redrawn uniformly, guaranteeing learnable structure with a known
// noise floor. Deterministic given the spec; regenerates with a shifted
// internal seed in the rare case a class ends up unrepresented.
Dataset generate_synthetic(const SyntheticSpec& spec);

// Size presets pairing a row class with a feature class, 3 label classes:
// rows SD=2000, MD=20000, BD=200000; features SF=8, BF=64. Accepts names
// like "SD/SF", "sdsf", "BD_BF"; nullopt when the name is not a preset.
std::optional<SyntheticSpec> preset_synthetic(const std::string& name,
                                              std::uint64_t seed);

}  // namespace bayestree
