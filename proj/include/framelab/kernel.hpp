#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "framelab/core.hpp"

namespace framelab {

/// Gaussian relevance kernel settings. The bandwidth is either one isotropic
/// sigma or one sigma per feature dimension (a diagonal covariance).
struct KernelConfig {
  std::variant<double, std::vector<double>> bandwidth = 1.0;
  /// Multiply by the Gaussian normalizer Z = 1/sqrt(|2 pi Sigma|). Off by
  /// default so relevance stays in (0, 1].
  bool normalize = false;

  static KernelConfig isotropic(double sigma, bool normalize = false);
  static KernelConfig diagonal(std::vector<double> sigmas, bool normalize = false);

  /// Throws std::invalid_argument unless every sigma is positive and finite.
  void validate() const;
  double sigma(std::size_t dim) const;
};

/// Gaussian normalizer Z for a `dim`-dimensional input.
double kernel_normalizer(const KernelConfig& config, std::size_t dim);

/// exp(-1/2 (xi - xj)^T Sigma^-1 (xi - xj)), times Z when config.normalize.
double relevance(FrameFeatures xi, FrameFeatures xj, const KernelConfig& config);

struct BandwidthFit {
  KernelConfig config;
  double median_distance = 0.0;
  /// Set when every distance was zero and sigma fell back to 1.
  bool degenerate = false;
};

/// Median heuristic: sigma = median Euclidean distance over the pairs / sqrt(2).
BandwidthFit median_bandwidth(std::span<const std::pair<FrameFeatures, FrameFeatures>> pairs);

/// Same heuristic from precomputed distances.
BandwidthFit median_bandwidth_from_distances(std::vector<double> distances);

double euclidean_distance(FrameFeatures a, FrameFeatures b);

}  // namespace framelab
