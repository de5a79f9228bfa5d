#include "framelab/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "framelab/parallel.hpp"
#include "framelab/rng.hpp"

namespace framelab {

void RedundancySweepConfig::validate() const {
  if (rhos.empty()) throw std::invalid_argument("redundancy sweep: empty rho grid");
  for (double rho : rhos) {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("redundancy sweep: rho must lie in [0, 1)");
  }
  if (videos_per_cell < 1) throw std::invalid_argument("redundancy sweep: videos_per_cell must be >= 1");
  if (generator.frames < 2) throw std::invalid_argument("redundancy sweep: videos need at least 2 frames");
  generator.validate();
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

std::vector<SyntheticVideo> cell_corpus(const RedundancySweepConfig& config, const Matrix& prototypes,
                                        double rho) {
  GeneratorConfig gen = config.generator;
  gen.smoothness = rho;
  std::vector<SyntheticVideo> corpus(config.videos_per_cell);
  parallel_for(corpus.size(), config.workers, [&](std::size_t k) {
    GeneratorConfig local = gen;
    local.seed = derive_seed(config.seed, {stream::kVideo, k});
    corpus[k] = generate_video(local, prototypes);
  });
  return corpus;
}

}  // namespace

RedundancySweep redundancy_sweep(const RedundancySweepConfig& config) {
  config.validate();
  const auto prototypes = make_prototypes(config.generator.classes, config.generator.dim,
                                          derive_seed(config.seed, {stream::kCorpus}));

  RedundancySweep sweep;
  {
    const auto calibration = cell_corpus(config, prototypes, 0.0);
    std::vector<double> distances;
    for (const auto& video : calibration) {
      for (std::size_t t = 0; t + 1 < video.frame_count(); ++t) {
        distances.push_back(euclidean_distance(video.frame(t), video.frame(t + 1)));
      }
    }
    sweep.bandwidth = median_bandwidth_from_distances(std::move(distances));
    sweep.normalizer = kernel_normalizer(sweep.bandwidth.config, config.generator.dim);
  }
  const KernelConfig& kernel = sweep.bandwidth.config;

  for (double rho : config.rhos) {
    const auto corpus = cell_corpus(config, prototypes, rho);
    const std::size_t per_video = config.generator.frames - 1;
    RedundancyCell cell;
    cell.rho = rho;
    cell.relevances.assign(corpus.size() * per_video, 0.0);
    parallel_for(corpus.size(), config.workers, [&](std::size_t k) {
      for (std::size_t t = 0; t < per_video; ++t) {
        cell.relevances[k * per_video + t] =
            relevance(corpus[k].frame(t), corpus[k].frame(t + 1), kernel);
      }
    });
    double total = 0.0;
    for (double r : cell.relevances) {
      total += r;
      const auto bin = std::min<std::size_t>(static_cast<std::size_t>(r * kRelevanceBins), kRelevanceBins - 1);
      ++cell.histogram[bin];
    }
    cell.mean = total / static_cast<double>(cell.relevances.size());
    auto sorted = cell.relevances;
    std::sort(sorted.begin(), sorted.end());
    cell.p10 = percentile(sorted, 0.10);
    cell.p50 = percentile(sorted, 0.50);
    cell.p90 = percentile(sorted, 0.90);
    sweep.cells.push_back(std::move(cell));
  }

  // Scan cells in increasing rho for the first crossing of 0.5.
  std::vector<const RedundancyCell*> ordered;
  for (const auto& c : sweep.cells) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const RedundancyCell* a, const RedundancyCell* b) { return a->rho < b->rho; });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i]->mean >= 0.5) {
      if (i == 0) {
        sweep.half_relevance_rho = ordered[i]->rho;
      } else {
        const auto* lo = ordered[i - 1];
        const auto* hi = ordered[i];
        const double w = (0.5 - lo->mean) / (hi->mean - lo->mean);
        sweep.half_relevance_rho = lo->rho + w * (hi->rho - lo->rho);
      }
      break;
    }
  }
  return sweep;
}

}  // namespace framelab
