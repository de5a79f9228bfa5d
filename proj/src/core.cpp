#include "framelab/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace framelab {

namespace {
__extension__ using Wide = unsigned __int128;
}  // namespace

FrameIndexSet::FrameIndexSet(std::vector<std::size_t> indices, std::size_t frame_count)
    : indices_(std::move(indices)), frame_count_(frame_count) {
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] >= frame_count_) {
      throw std::invalid_argument("frame index " + std::to_string(indices_[k]) +
                                  " out of range for T=" + std::to_string(frame_count_));
    }
    if (k > 0 && indices_[k] <= indices_[k - 1]) {
      throw std::invalid_argument("frame indices must be strictly increasing");
    }
  }
}

FrameIndexSet FrameIndexSet::from_unordered(std::vector<std::size_t> indices,
                                            std::size_t frame_count) {
  std::sort(indices.begin(), indices.end());
  return FrameIndexSet(std::move(indices), frame_count);
}

FrameIndexSet FrameIndexSet::all(std::size_t frame_count) {
  std::vector<std::size_t> idx(frame_count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return FrameIndexSet(std::move(idx), frame_count);
}

bool FrameIndexSet::contains(std::size_t t) const {
  return std::binary_search(indices_.begin(), indices_.end(), t);
}

std::vector<double> softmax(std::span<const double> values, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("softmax temperature must be positive and finite");
  }
  if (values.empty()) {
    throw std::invalid_argument("softmax of an empty vector");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("softmax input must be finite");
  }
  const double max_value = *std::max_element(values.begin(), values.end());
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp((values[i] - max_value) / temperature);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

FrameIndexSet top_n_indices(std::span<const double> scores, std::size_t n) {
  if (n == 0 || n > scores.size()) {
    throw std::invalid_argument("top-n requires 1 <= n <= T (n=" + std::to_string(n) +
                                ", T=" + std::to_string(scores.size()) + ")");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("top-n scores must be finite");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(n);
  return FrameIndexSet::from_unordered(std::move(order), scores.size());
}

std::uint64_t binomial(std::uint64_t t, std::uint64_t n) {
  if (n > t) {
    throw std::invalid_argument("binomial requires n <= t (t=" + std::to_string(t) +
                                ", n=" + std::to_string(n) + ")");
  }
  n = std::min(n, t - n);
  // result * (t - n + k) is always divisible by k, so every partial value is exact.
  Wide result = 1;
  for (std::uint64_t k = 1; k <= n; ++k) {
    result = result * (t - n + k) / k;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      throw CapacityError("binomial(" + std::to_string(t) + ", " + std::to_string(n) +
                          ") overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(result);
}

std::string join_indices(const FrameIndexSet& set) {
  std::string out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k > 0) out += ';';
    out += std::to_string(set[k]);
  }
  return out;
}

}  // namespace framelab
