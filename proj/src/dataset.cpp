#include "bayestree/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bayestree {

Dataset::Dataset(std::vector<double> features, std::size_t feature_count,
                 std::vector<int> labels, int class_count)
    : cols_(feature_count),
      classes_(class_count),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (cols_ == 0) throw std::invalid_argument("dataset: no features");
  if (classes_ < 2) throw std::invalid_argument("dataset: need at least 2 classes");
  if (labels_.empty()) throw std::invalid_argument("dataset: no rows");
  if (features_.size() != labels_.size() * cols_) {
    throw std::invalid_argument("dataset: feature matrix shape mismatch");
  }
  rows_ = labels_.size();

  for (std::size_t i = 0; i < rows_; ++i) {
    if (labels_[i] < 0 || labels_[i] >= classes_) {
      throw std::invalid_argument("dataset: label out of range at row " +
                                  std::to_string(i));
    }
  }
  for (double v : features_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("dataset: non-finite feature value");
    }
  }

  unique_.resize(cols_);
  candidates_.resize(cols_);
  std::vector<double> col(rows_);
  for (std::size_t f = 0; f < cols_; ++f) {
    for (std::size_t i = 0; i < rows_; ++i) col[i] = features_[i * cols_ + f];
    std::sort(col.begin(), col.end());
    auto& uniq = unique_[f];
    uniq.clear();
    for (double v : col) {
      if (uniq.empty() || uniq.back() != v) uniq.push_back(v);
    }
    auto& cand = candidates_[f];
    cand.reserve(uniq.size() > 0 ? uniq.size() - 1 : 0);
    for (std::size_t j = 0; j + 1 < uniq.size(); ++j) {
      cand.push_back(0.5 * (uniq[j] + uniq[j + 1]));
    }
    if (!cand.empty()) splittable_.push_back(f);
  }
}

bool Dataset::on_candidate_grid(std::size_t f, double threshold) const {
  const auto& cand = candidates_[f];
  return std::binary_search(cand.begin(), cand.end(), threshold);
}

Dataset Dataset::subset(std::span<const std::size_t> row_indices) const {
  if (row_indices.empty()) throw std::invalid_argument("subset: no rows selected");
  std::vector<double> x;
  x.reserve(row_indices.size() * cols_);
  std::vector<int> y;
  y.reserve(row_indices.size());
  for (std::size_t i : row_indices) {
    if (i >= rows_) throw std::invalid_argument("subset: row index out of range");
    const auto r = row(i);
    x.insert(x.end(), r.begin(), r.end());
    y.push_back(labels_[i]);
  }
  return Dataset(std::move(x), cols_, std::move(y), classes_);
}

}  // namespace bayestree
