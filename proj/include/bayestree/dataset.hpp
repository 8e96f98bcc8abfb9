#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bayestree {

// Immutable training data: an N x F matrix of finite feature values plus one
// class label in {0..K-1} per row. Split candidates are precomputed per
// feature as the midpoints between consecutive sorted distinct values; every
// proposal kernel draws thresholds from these grids.
class Dataset {
 public:
  Dataset(std::vector<double> features, std::size_t feature_count,
          std::vector<int> labels, int class_count);

  std::size_t rows() const { return rows_; }
  std::size_t feature_count() const { return cols_; }
  int class_count() const { return classes_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * cols_, cols_};
  }
  int label(std::size_t i) const { return labels_[i]; }

  // Sorted distinct observed values of feature f.
  std::span<const double> unique_values(std::size_t f) const {
    return unique_[f];
  }

  // Candidate split thresholds for feature f; empty when the feature is
  // constant over the dataset.
  std::span<const double> candidates(std::size_t f) const {
    return candidates_[f];
  }

  // Indices of features owning at least one candidate, ascending.
  std::span<const std::size_t> splittable_features() const {
    return splittable_;
  }

  bool on_candidate_grid(std::size_t f, double threshold) const;

  // Selected rows re-assembled into a new Dataset. The class count carries
  // over; candidate grids are rebuilt from the selected rows only.
  Dataset subset(std::span<const std::size_t> row_indices) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int classes_ = 0;
  std::vector<double> features_;  // row major
  std::vector<int> labels_;
  std::vector<std::vector<double>> unique_;
  std::vector<std::vector<double>> candidates_;
  std::vector<std::size_t> splittable_;
};

}  // namespace bayestree
