#include "framelab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace framelab {

KernelConfig KernelConfig::isotropic(double sigma, bool normalize) {
  KernelConfig c{sigma, normalize};
  c.validate();
  return c;
}

KernelConfig KernelConfig::diagonal(std::vector<double> sigmas, bool normalize) {
  KernelConfig c{std::move(sigmas), normalize};
  c.validate();
  return c;
}

void KernelConfig::validate() const {
  auto check = [](double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("kernel bandwidth must be positive and finite");
    }
  };
  if (const auto* s = std::get_if<double>(&bandwidth)) {
    check(*s);
  } else {
    const auto& v = std::get<std::vector<double>>(bandwidth);
    if (v.empty()) throw std::invalid_argument("diagonal bandwidth must be non-empty");
    for (double s : v) check(s);
  }
}

double KernelConfig::sigma(std::size_t dim) const {
  if (const auto* s = std::get_if<double>(&bandwidth)) return *s;
  return std::get<std::vector<double>>(bandwidth)[dim];
}

namespace {

void check_dims(const KernelConfig& config, std::size_t dim) {
  if (const auto* v = std::get_if<std::vector<double>>(&config.bandwidth)) {
    if (v->size() != dim) {
      throw std::invalid_argument("diagonal bandwidth has " + std::to_string(v->size()) +
                                  " entries for " + std::to_string(dim) + "-dimensional input");
    }
  }
}

}  // namespace

double kernel_normalizer(const KernelConfig& config, std::size_t dim) {
  config.validate();
  check_dims(config, dim);
  // Log space: |2 pi Sigma| underflows or overflows quickly as dim grows.
  double log_z = -0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
  for (std::size_t d = 0; d < dim; ++d) log_z -= std::log(config.sigma(d));
  return std::exp(log_z);
}

double relevance(FrameFeatures xi, FrameFeatures xj, const KernelConfig& config) {
  if (xi.size() != xj.size()) {
    throw std::invalid_argument("relevance: dimension mismatch (" + std::to_string(xi.size()) +
                                " vs " + std::to_string(xj.size()) + ")");
  }
  check_dims(config, xi.size());
  double quad = 0.0;
  for (std::size_t d = 0; d < xi.size(); ++d) {
    const double diff = (xi[d] - xj[d]) / config.sigma(d);
    quad += diff * diff;
  }
  const double value = std::exp(-0.5 * quad);
  return config.normalize ? value * kernel_normalizer(config, xi.size()) : value;
}

double euclidean_distance(FrameFeatures a, FrameFeatures b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  double sq = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) sq += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(sq);
}

BandwidthFit median_bandwidth_from_distances(std::vector<double> distances) {
  if (distances.size() < 1) throw std::invalid_argument("median bandwidth needs at least one pair");
  std::sort(distances.begin(), distances.end());
  const std::size_t n = distances.size();
  const double median =
      n % 2 == 1 ? distances[n / 2] : 0.5 * (distances[n / 2 - 1] + distances[n / 2]);
  BandwidthFit fit;
  fit.median_distance = median;
  if (median > 0.0) {
    fit.config = KernelConfig::isotropic(median / std::numbers::sqrt2);
  } else {
    fit.config = KernelConfig::isotropic(1.0);
    fit.degenerate = true;
  }
  return fit;
}

BandwidthFit median_bandwidth(std::span<const std::pair<FrameFeatures, FrameFeatures>> pairs) {
  std::vector<double> distances;
  distances.reserve(pairs.size());
  for (const auto& [a, b] : pairs) distances.push_back(euclidean_distance(a, b));
  return median_bandwidth_from_distances(std::move(distances));
}

}  // namespace framelab
