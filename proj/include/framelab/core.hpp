#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace framelab {

/// Raised when a computation would exceed a representable or configured size,
/// e.g. a binomial coefficient wider than 64 bits or a subset enumeration
/// larger than the allowed budget.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major matrix of doubles. Rows are frames, time steps or
/// output units depending on context.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Frame embeddings: one row per frame, one column per feature dimension.
using FrameFeatures = std::span<const double>;

/// Per-frame class confidences, T rows by C columns; every row sums to 1.
using ConfidenceMatrix = Matrix;

/// Strictly increasing set of distinct frame indices in [0, T).
class FrameIndexSet {
 public:
  FrameIndexSet() = default;

  /// Validates and stores `indices`. Throws std::invalid_argument when they
  /// are not strictly increasing or fall outside [0, frame_count).
  FrameIndexSet(std::vector<std::size_t> indices, std::size_t frame_count);

  /// Sorts arbitrary-order indices before validating; duplicates are rejected.
  static FrameIndexSet from_unordered(std::vector<std::size_t> indices, std::size_t frame_count);

  static FrameIndexSet all(std::size_t frame_count);

  std::size_t size() const { return indices_.size(); }
  std::size_t frame_count() const { return frame_count_; }
  bool contains(std::size_t t) const;
  std::span<const std::size_t> indices() const { return indices_; }
  std::size_t operator[](std::size_t k) const { return indices_[k]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  bool operator==(const FrameIndexSet&) const = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t frame_count_ = 0;
};

/// Max-subtracted softmax of values / temperature.
std::vector<double> softmax(std::span<const double> values, double temperature = 1.0);

/// Indices of the n largest scores, ties going to the smaller index,
/// returned in increasing index order.
FrameIndexSet top_n_indices(std::span<const double> scores, std::size_t n);

/// Exact C(t, n). Throws CapacityError if the result does not fit in 64 bits.
std::uint64_t binomial(std::uint64_t t, std::uint64_t n);

/// Joins indices with ';' (the CSV encoding of a selection).
std::string join_indices(const FrameIndexSet& set);

}  // namespace framelab
