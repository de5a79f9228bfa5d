#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "framelab/classifier.hpp"
#include "framelab/kernel.hpp"

namespace framelab {

inline constexpr std::size_t kRelevanceBins = 20;

struct RedundancySweepConfig {
  /// Base generator settings; smoothness is overridden per cell.
  GeneratorConfig generator;
  std::vector<double> rhos;
  std::size_t videos_per_cell = 200;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

struct RedundancyCell {
  double rho = 0.0;
  double mean = 0.0;
  double p10 = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  /// Counts over [0, 1] in 20 equal bins; 1.0 falls in the last bin.
  std::array<std::uint64_t, kRelevanceBins> histogram{};
  /// Consecutive-pair relevances, video-major then frame order.
  std::vector<double> relevances;
};

struct RedundancySweep {
  BandwidthFit bandwidth;
  /// Gaussian normalizer for the fitted bandwidth (reported, not applied).
  double normalizer = 0.0;
  std::vector<RedundancyCell> cells;
  /// Interpolated rho at which the mean relevance first reaches 0.5.
  std::optional<double> half_relevance_rho;
};

/// Linear-interpolation percentile of `sorted` (q in [0, 1]).
double percentile(const std::vector<double>& sorted, double q);

/// Consecutive-frame relevance per smoothness level. The bandwidth is fitted
/// once, by the median heuristic on the consecutive pairs of a rho = 0 corpus
/// drawn with the same video seeds, and then held fixed for every cell.
/// Cells reuse video seeds so that only rho differs between them.
RedundancySweep redundancy_sweep(const RedundancySweepConfig& config);

}  // namespace framelab
