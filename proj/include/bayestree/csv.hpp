#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "bayestree/dataset.hpp"

namespace bayestree {

// Dataset plus the label-name mapping (class id = position, first occurrence
// order) and the 1-based file line numbers of rows dropped for non-numeric
// feature cells.
struct CsvLoadResult {
  Dataset data;
  std::vector<std::string> label_names;
  std::vector<std::size_t> rejected_lines;
};

// Comma-delimited, '.' decimal point, UTF-8. label_column: 0-based index,
// or -1 for the last column. Structural problems (inconsistent column
// count, empty file, single label class) throw std::runtime_error with the
// offending line number where applicable; rows whose feature cells fail to
// parse as numbers are skipped and recorded instead.
CsvLoadResult load_csv(const std::filesystem::path& path, int label_column,
                       bool has_header);

// Feature-only matrix for prediction input. Accepts files with exactly
// `feature_count` columns, or `feature_count + 1` when a label column to
// ignore is present (label_column as above).
std::vector<std::vector<double>> load_feature_csv(
    const std::filesystem::path& path, std::size_t feature_count,
    int label_column, bool has_header);

}  // namespace bayestree
