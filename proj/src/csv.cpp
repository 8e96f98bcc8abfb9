#include "bayestree/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace bayestree {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

struct RawCsv {
  std::vector<std::vector<std::string>> rows;  // parsed field lists
  std::vector<std::size_t> line_numbers;       // 1-based source lines
  std::size_t columns = 0;
};

RawCsv read_rows(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path.string());

  RawCsv raw;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    line_no += 1;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    auto fields = split_fields(line);
    if (raw.columns == 0) {
      raw.columns = fields.size();
      if (raw.columns < 2) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": need at least 2 columns");
      }
    } else if (fields.size() != raw.columns) {
      throw std::runtime_error(
          path.string() + ":" + std::to_string(line_no) + ": expected " +
          std::to_string(raw.columns) + " columns, found " +
          std::to_string(fields.size()));
    }
    raw.rows.push_back(std::move(fields));
    raw.line_numbers.push_back(line_no);
  }
  if (raw.rows.empty()) {
    throw std::runtime_error("csv file has no data rows: " + path.string());
  }
  return raw;
}

std::size_t resolve_label_column(int label_column, std::size_t columns) {
  const std::size_t col =
      label_column < 0 ? columns - 1 : static_cast<std::size_t>(label_column);
  if (col >= columns) {
    throw std::runtime_error("label column " + std::to_string(label_column) +
                             " out of range for " + std::to_string(columns) +
                             " columns");
  }
  return col;
}

}  // namespace

CsvLoadResult load_csv(const std::filesystem::path& path, int label_column,
                       bool has_header) {
  RawCsv raw = read_rows(path, has_header);
  const std::size_t label_col = resolve_label_column(label_column, raw.columns);
  const std::size_t feature_count = raw.columns - 1;

  std::vector<double> features;
  std::vector<int> labels;
  std::vector<std::string> label_names;
  std::unordered_map<std::string, int> label_ids;
  std::vector<std::size_t> rejected;

  std::vector<double> row_buf(feature_count);
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& fields = raw.rows[r];
    bool ok = true;
    std::size_t out = 0;
    for (std::size_t c = 0; c < raw.columns; ++c) {
      if (c == label_col) continue;
      const auto v = parse_number(fields[c]);
      if (!v) {
        ok = false;
        break;
      }
      row_buf[out++] = *v;
    }
    if (!ok) {
      rejected.push_back(raw.line_numbers[r]);
      continue;
    }

    const std::string& name = fields[label_col];
    auto [it, inserted] =
        label_ids.emplace(name, static_cast<int>(label_names.size()));
    if (inserted) label_names.push_back(name);
    labels.push_back(it->second);
    features.insert(features.end(), row_buf.begin(), row_buf.end());
  }

  if (labels.empty()) {
    throw std::runtime_error("csv file has no usable rows: " + path.string());
  }
  if (label_names.size() < 2) {
    throw std::runtime_error("csv file holds a single label class: " +
                             path.string());
  }

  return CsvLoadResult{
      Dataset(std::move(features), feature_count, std::move(labels),
              static_cast<int>(label_names.size())),
      std::move(label_names), std::move(rejected)};
}

std::vector<std::vector<double>> load_feature_csv(
    const std::filesystem::path& path, std::size_t feature_count,
    int label_column, bool has_header) {
  RawCsv raw = read_rows(path, has_header);

  std::optional<std::size_t> skip_col;
  if (raw.columns == feature_count + 1) {
    skip_col = resolve_label_column(label_column, raw.columns);
  } else if (raw.columns != feature_count) {
    throw std::runtime_error(path.string() + ": expected " +
                             std::to_string(feature_count) + " feature columns, found " +
                             std::to_string(raw.columns));
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::vector<double> x;
    x.reserve(feature_count);
    for (std::size_t c = 0; c < raw.columns; ++c) {
      if (skip_col && c == *skip_col) continue;
      const auto v = parse_number(raw.rows[r][c]);
      if (!v) {
        throw std::runtime_error(path.string() + ":" +
                                 std::to_string(raw.line_numbers[r]) +
                                 ": non-numeric feature cell");
      }
      x.push_back(*v);
    }
    rows.push_back(std::move(x));
  }
  return rows;
}

}  // namespace bayestree
