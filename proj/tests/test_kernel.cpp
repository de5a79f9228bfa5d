#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "framelab/kernel.hpp"
#include "framelab/rng.hpp"

using namespace framelab;

TEST_CASE("relevance examples") {
  const std::vector<double> a{0.3, -1.2, 4.0};
  CHECK(relevance(a, a, KernelConfig::isotropic(0.7)) == 1.0);

  const std::vector<double> x{0.0}, y{2.0};
  CHECK(relevance(x, y, KernelConfig::isotropic(1.0)) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(relevance(x, y, KernelConfig::isotropic(1.0)) == doctest::Approx(0.1353).epsilon(1e-3));

  const std::vector<double> far{1e6};
  CHECK(relevance(x, far, KernelConfig::isotropic(1.0)) == 0.0);
}

TEST_CASE("relevance diagonal bandwidth") {
  const std::vector<double> x{0.0, 0.0}, y{1.0, 2.0};
  const auto cfg = KernelConfig::diagonal({1.0, 2.0});
  // (1/1)^2 + (2/2)^2 = 2
  CHECK(relevance(x, y, cfg) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("normalized kernel multiplies by the Gaussian normalizer") {
  const std::vector<double> x{0.0, 1.0}, y{1.0, -1.0};
  const auto raw = KernelConfig::isotropic(1.5);
  const auto norm = KernelConfig::isotropic(1.5, true);
  const double z = 1.0 / (2.0 * std::numbers::pi * 1.5 * 1.5);
  CHECK(kernel_normalizer(norm, 2) == doctest::Approx(z).epsilon(1e-14));
  CHECK(relevance(x, y, norm) == doctest::Approx(z * relevance(x, y, raw)).epsilon(1e-14));
}

TEST_CASE("relevance errors") {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  CHECK_THROWS_AS(relevance(a, b, KernelConfig::isotropic(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(relevance(a, a, KernelConfig::isotropic(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(relevance(a, a, KernelConfig::diagonal({1.0})), std::invalid_argument);
  CHECK_THROWS_AS(KernelConfig::diagonal({1.0, -2.0}).validate(), std::invalid_argument);
}

TEST_CASE("relevance is symmetric and monotone in bandwidth") {
  Rng rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(4), b(4);
    for (double& v : a) v = normal(rng);
    for (double& v : b) v = normal(rng);
    const auto cfg = KernelConfig::isotropic(0.5 + trial * 0.01);
    CHECK(relevance(a, b, cfg) == relevance(b, a, cfg));

    const std::vector<double> p{normal(rng)}, q{normal(rng)};
    const double s = 0.2 + trial * 0.02;
    CHECK(relevance(p, q, KernelConfig::isotropic(2.0 * s)) >= relevance(p, q, KernelConfig::isotropic(s)));
  }
}

TEST_CASE("median bandwidth") {
  auto fit = median_bandwidth_from_distances({1.0, 2.0, 3.0});
  CHECK(fit.config.sigma(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(fit.median_distance == 2.0);
  CHECK_FALSE(fit.degenerate);

  fit = median_bandwidth_from_distances({4.0});
  CHECK(fit.config.sigma(1) == doctest::Approx(4.0 / std::sqrt(2.0)).epsilon(1e-15));

  fit = median_bandwidth_from_distances({0.0, 0.0});
  CHECK(fit.config.sigma(1) == 1.0);
  CHECK(fit.degenerate);

  fit = median_bandwidth_from_distances({4.0, 1.0, 3.0, 2.0});
  CHECK(fit.median_distance == 2.5);

  CHECK_THROWS_AS(median_bandwidth_from_distances({}), std::invalid_argument);

  const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
  const std::vector<std::pair<FrameFeatures, FrameFeatures>> pairs{{a, b}};
  CHECK(median_bandwidth(pairs).median_distance == 5.0);
}
