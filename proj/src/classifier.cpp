#include "framelab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "framelab/rng.hpp"

namespace framelab {

void GeneratorConfig::validate() const {
  if (frames < 1 || dim < 1 || classes < 1) {
    throw std::invalid_argument("generator: T, D and C must all be at least 1");
  }
  if (!(smoothness >= 0.0 && smoothness < 1.0)) {
    throw std::invalid_argument("generator: smoothness must lie in [0, 1)");
  }
  if (!(salient_fraction > 0.0 && salient_fraction <= 1.0)) {
    throw std::invalid_argument("generator: salient_fraction must lie in (0, 1]");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw std::invalid_argument("generator: noise_scale must be non-negative");
  }
  if (!std::isfinite(signal_gain)) throw std::invalid_argument("generator: signal_gain must be finite");
}

Matrix make_prototypes(std::size_t classes, std::size_t dim, std::uint64_t seed) {
  if (classes < 1 || dim < 1) throw std::invalid_argument("prototypes: C and D must be at least 1");
  Rng rng(derive_seed(seed, {stream::kPrototypes}));
  std::normal_distribution<double> normal;
  Matrix protos(classes, dim);
  for (std::size_t c = 0; c < classes; ++c) {
    auto row = protos.row(c);
    for (;;) {
      for (double& v : row) v = normal(rng);
      if (classes <= dim) {
        // Gram-Schmidt against earlier rows (applied twice for stability).
        for (int pass = 0; pass < 2; ++pass) {
          for (std::size_t p = 0; p < c; ++p) {
            auto prev = protos.row(p);
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += row[d] * prev[d];
            for (std::size_t d = 0; d < dim; ++d) row[d] -= dot * prev[d];
          }
        }
      }
      double norm = 0.0;
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (double& v : row) v /= norm;
        break;
      }
    }
  }
  return protos;
}

SyntheticVideo generate_video(const GeneratorConfig& config, const Matrix& prototypes) {
  config.validate();
  if (prototypes.rows() != config.classes || prototypes.cols() != config.dim) {
    throw std::invalid_argument("generator: prototypes must be C x D");
  }
  const std::size_t T = config.frames;
  const std::size_t D = config.dim;
  Rng rng(config.seed);
  std::normal_distribution<double> normal;

  SyntheticVideo video;
  video.classes = config.classes;
  video.smoothness = config.smoothness;
  video.seed = config.seed;
  video.label = std::uniform_int_distribution<std::size_t>(0, config.classes - 1)(rng);

  std::size_t distractor = video.label;
  if (config.classes > 1) {
    distractor = std::uniform_int_distribution<std::size_t>(0, config.classes - 2)(rng);
    if (distractor >= video.label) ++distractor;
  }

  const auto segment = std::min<std::size_t>(
      T, static_cast<std::size_t>(std::ceil(config.salient_fraction * static_cast<double>(T) - 1e-12)));
  const std::size_t start =
      std::uniform_int_distribution<std::size_t>(0, T - std::max<std::size_t>(segment, 1))(rng);
  video.salient_mask.assign(T, false);
  for (std::size_t t = start; t < start + std::max<std::size_t>(segment, 1); ++t) video.salient_mask[t] = true;

  const double rho = config.smoothness;
  const double innovation = std::sqrt(1.0 - rho * rho);
  video.frames = Matrix(T, D);
  for (std::size_t d = 0; d < D; ++d) video.frames(0, d) = normal(rng);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) {
      video.frames(t, d) = rho * video.frames(t - 1, d) + innovation * normal(rng);
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    auto row = video.frames.row(t);
    if (video.salient_mask[t]) {
      auto proto = prototypes.row(video.label);
      for (std::size_t d = 0; d < D; ++d) row[d] += config.signal_gain * proto[d];
    } else if (config.classes > 1) {
      auto proto = prototypes.row(distractor);
      for (std::size_t d = 0; d < D; ++d) row[d] += 0.5 * config.signal_gain * proto[d];
    }
    for (std::size_t d = 0; d < D; ++d) row[d] += config.noise_scale * normal(rng);
  }
  return video;
}

std::vector<SyntheticVideo> generate_corpus(GeneratorConfig config, const Matrix& prototypes,
                                            std::size_t count, std::uint64_t seed) {
  std::vector<SyntheticVideo> corpus;
  corpus.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    config.seed = derive_seed(seed, {stream::kVideo, k});
    corpus.push_back(generate_video(config, prototypes));
  }
  return corpus;
}

std::string to_string(ClassifierKind kind) {
  return kind == ClassifierKind::Additive ? "additive" : "redundancy-penalized";
}

ClassifierKind classifier_kind_from_string(const std::string& name) {
  if (name == "additive") return ClassifierKind::Additive;
  if (name == "redundancy-penalized") return ClassifierKind::RedundancyPenalized;
  throw std::invalid_argument("unknown classifier kind '" + name + "'");
}

Classifier::Classifier(ClassifierKind kind, Matrix prototypes, double temperature,
                       double interaction_strength, KernelConfig kernel)
    : kind_(kind),
      prototypes_(std::move(prototypes)),
      temperature_(temperature),
      interaction_strength_(interaction_strength),
      kernel_(std::move(kernel)) {
  if (prototypes_.rows() < 1 || prototypes_.cols() < 1) {
    throw std::invalid_argument("classifier: prototypes must be non-empty");
  }
  for (std::size_t c = 0; c < prototypes_.rows(); ++c) {
    double norm = 0.0;
    for (double v : prototypes_.row(c)) norm += v * v;
    if (std::abs(std::sqrt(norm) - 1.0) > 1e-9) {
      throw std::invalid_argument("classifier: prototypes must be unit-norm");
    }
  }
  if (!(temperature_ > 0.0)) throw std::invalid_argument("classifier: temperature must be positive");
  if (!(interaction_strength_ >= 0.0)) {
    throw std::invalid_argument("classifier: interaction_strength must be non-negative");
  }
  if (kind_ == ClassifierKind::Additive && interaction_strength_ != 0.0) {
    throw std::invalid_argument("classifier: additive kind has no interaction term");
  }
  kernel_.validate();
}

Classifier Classifier::additive(Matrix prototypes, double temperature) {
  return Classifier(ClassifierKind::Additive, std::move(prototypes), temperature, 0.0);
}

Classifier Classifier::redundancy_penalized(Matrix prototypes, double interaction_strength,
                                            double temperature) {
  const double sigma = std::sqrt(static_cast<double>(prototypes.cols()));
  return Classifier(ClassifierKind::RedundancyPenalized, std::move(prototypes), temperature,
                    interaction_strength, KernelConfig::isotropic(sigma));
}

void Classifier::check_video(const SyntheticVideo& video) const {
  if (video.dim() != dim()) {
    throw std::invalid_argument("classifier: frame dimension " + std::to_string(video.dim()) +
                                " does not match prototype dimension " + std::to_string(dim()));
  }
  if (video.label >= classes()) throw std::invalid_argument("classifier: video label out of range");
}

std::vector<double> Classifier::frame_confidence(const SyntheticVideo& video, std::size_t t) const {
  const auto x = video.frame(t);
  std::vector<double> logits(classes());
  for (std::size_t c = 0; c < classes(); ++c) {
    const auto proto = prototypes_.row(c);
    double dot = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) dot += x[d] * proto[d];
    logits[c] = dot / temperature_;
  }
  return softmax(logits);
}

namespace {

// Mean of the selected frames' confidences, then the redundancy penalty on
// the true label. Shared by Classifier and ClipScorer so both give
// bit-identical results.
template <typename Confidence, typename Relevance>
std::vector<double> pool_clip(std::span<const std::size_t> subset, std::size_t classes, std::size_t label,
                              double strength, bool penalized, Confidence&& confidence, Relevance&& rel) {
  std::vector<double> mean(classes, 0.0);
  for (std::size_t t : subset) {
    const auto q = confidence(t);
    for (std::size_t c = 0; c < classes; ++c) mean[c] += q[c];
  }
  const auto n = static_cast<double>(subset.size());
  for (double& v : mean) v /= n;

  if (!penalized || subset.size() < 2 || strength == 0.0) return mean;
  double redundancy = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < subset.size(); ++a) {
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      redundancy += rel(subset[a], subset[b]);
      ++pairs;
    }
  }
  redundancy /= static_cast<double>(pairs);
  mean[label] *= std::exp(-strength * redundancy);
  double total = 0.0;
  for (double v : mean) total += v;
  for (double& v : mean) v /= total;
  return mean;
}

}  // namespace

void Classifier::check_subset(const SyntheticVideo& video, const FrameIndexSet& subset) const {
  if (subset.size() == 0) throw std::invalid_argument("classifier: empty clip");
  if (subset.frame_count() != video.frame_count()) {
    throw std::invalid_argument("classifier: subset built for T=" + std::to_string(subset.frame_count()) +
                                " but video has T=" + std::to_string(video.frame_count()));
  }
}

std::vector<double> Classifier::classify_clip(const SyntheticVideo& video,
                                              const FrameIndexSet& subset) const {
  check_video(video);
  check_subset(video, subset);
  calls_->fetch_add(1, std::memory_order_relaxed);
  return pool_clip(
      subset.indices(), classes(), video.label, interaction_strength_, kind_ == ClassifierKind::RedundancyPenalized,
      [&](std::size_t t) { return frame_confidence(video, t); },
      [&](std::size_t a, std::size_t b) { return relevance(video.frame(a), video.frame(b), kernel_); });
}

ClipScorer::ClipScorer(const Classifier& classifier, const SyntheticVideo& video)
    : classifier_(classifier), video_(video) {
  classifier.check_video(video);
  const std::size_t T = video.frame_count();
  confidences_ = ConfidenceMatrix(T, classifier.classes());
  for (std::size_t t = 0; t < T; ++t) {
    const auto q = classifier.frame_confidence(video, t);
    std::copy(q.begin(), q.end(), confidences_.row(t).begin());
  }
  if (classifier.kind() == ClassifierKind::RedundancyPenalized && classifier.interaction_strength() != 0.0) {
    relevances_ = Matrix(T, T);
    for (std::size_t a = 0; a < T; ++a) {
      for (std::size_t b = a + 1; b < T; ++b) {
        relevances_(a, b) = relevance(video.frame(a), video.frame(b), classifier.kernel());
      }
    }
  }
}

std::vector<double> ClipScorer::classify_clip(std::span<const std::size_t> subset) const {
  classifier_.calls_->fetch_add(1, std::memory_order_relaxed);
  return pool_clip(
      subset, classifier_.classes(), video_.label, classifier_.interaction_strength(),
      classifier_.kind() == ClassifierKind::RedundancyPenalized,
      [&](std::size_t t) { return confidences_.row(t); },
      [&](std::size_t a, std::size_t b) { return relevances_(a, b); });
}

std::vector<double> ClipScorer::classify_clip(const FrameIndexSet& subset) const {
  classifier_.check_subset(video_, subset);
  return classify_clip(subset.indices());
}

std::vector<double> Classifier::classify_frame(const SyntheticVideo& video, std::size_t t) const {
  if (t >= video.frame_count()) {
    throw std::invalid_argument("classifier: frame " + std::to_string(t) + " out of range for T=" +
                                std::to_string(video.frame_count()));
  }
  return classify_clip(video, FrameIndexSet({t}, video.frame_count()));
}

ConfidenceMatrix Classifier::classify_frames(const SyntheticVideo& video) const {
  ConfidenceMatrix out(video.frame_count(), classes());
  for (std::size_t t = 0; t < video.frame_count(); ++t) {
    const auto q = classify_frame(video, t);
    std::copy(q.begin(), q.end(), out.row(t).begin());
  }
  return out;
}

}  // namespace framelab
