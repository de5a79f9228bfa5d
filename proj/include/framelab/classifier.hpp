#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "framelab/core.hpp"
#include "framelab/kernel.hpp"

namespace framelab {

/// Settings for the synthetic video generator.
struct GeneratorConfig {
  std::size_t frames = 10;    // T
  std::size_t dim = 32;       // D
  std::size_t classes = 5;    // C
  double smoothness = 0.5;    // AR(1) coefficient, stands in for frame rate
  double salient_fraction = 0.3;
  double noise_scale = 0.3;
  double signal_gain = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticVideo {
  Matrix frames;  // T x D
  std::size_t label = 0;
  std::size_t classes = 0;
  std::vector<bool> salient_mask;
  double smoothness = 0.0;
  std::uint64_t seed = 0;

  std::size_t frame_count() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
  FrameFeatures frame(std::size_t t) const { return frames.row(t); }

  bool operator==(const SyntheticVideo&) const = default;
};

/// C unit-norm class prototypes in R^D (one per row). Orthonormal when C <= D.
Matrix make_prototypes(std::size_t classes, std::size_t dim, std::uint64_t seed);

/// Draws one video. `prototypes` must be C x D for the configured C and D.
///
/// The label is uniform over classes. A base trajectory follows
///   x_{t+1} = rho * x_t + sqrt(1 - rho^2) * eps_t
/// started from its stationary distribution. A contiguous segment of
/// ceil(salient_fraction * T) frames receives gain * prototype[label]; the
/// remaining frames receive (gain / 2) * prototype[distractor], where the
/// distractor is one non-label class drawn per video. White noise of
/// standard deviation noise_scale is added last.
SyntheticVideo generate_video(const GeneratorConfig& config, const Matrix& prototypes);

/// `count` videos, video k drawn with seed derive_seed(seed, {kVideo, k}).
std::vector<SyntheticVideo> generate_corpus(GeneratorConfig config, const Matrix& prototypes,
                                            std::size_t count, std::uint64_t seed);

enum class ClassifierKind { Additive, RedundancyPenalized };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& name);

/// Frozen synthetic classifier over frame features.
///
/// Each frame t gets logits <x_t, prototype_i> / temperature and the
/// single-frame confidence q_t = softmax of those logits. A clip's confidence
/// is the mean of its frames' q_t. The redundancy-penalized kind then scales
/// the true-label entry by exp(-strength * R), R being the mean pairwise
/// relevance among the selected frames, and renormalizes; this equals
/// subtracting strength * R from the true-label log-confidence before a
/// softmax. Single-frame clips have R = 0, so both kinds agree on them.
class Classifier {
 public:
  Classifier(ClassifierKind kind, Matrix prototypes, double temperature = 1.0,
             double interaction_strength = 0.0, KernelConfig kernel = {});

  static Classifier additive(Matrix prototypes, double temperature = 1.0);
  /// Kernel bandwidth defaults to sqrt(D).
  static Classifier redundancy_penalized(Matrix prototypes, double interaction_strength = 0.5,
                                         double temperature = 1.0);

  ClassifierKind kind() const { return kind_; }
  const Matrix& prototypes() const { return prototypes_; }
  double temperature() const { return temperature_; }
  double interaction_strength() const { return interaction_strength_; }
  const KernelConfig& kernel() const { return kernel_; }
  std::size_t classes() const { return prototypes_.rows(); }
  std::size_t dim() const { return prototypes_.cols(); }

  /// Confidence vector for the clip made of `subset`. Counts one call.
  std::vector<double> classify_clip(const SyntheticVideo& video, const FrameIndexSet& subset) const;
  /// classify_clip with the single frame {t}. Counts one call.
  std::vector<double> classify_frame(const SyntheticVideo& video, std::size_t t) const;
  /// All T single-frame predictions stacked; counts T calls.
  ConfidenceMatrix classify_frames(const SyntheticVideo& video) const;

  std::uint64_t calls() const { return calls_->load(); }
  void reset_calls() const { calls_->store(0); }

 private:
  friend class ClipScorer;

  std::vector<double> frame_confidence(const SyntheticVideo& video, std::size_t t) const;
  void check_video(const SyntheticVideo& video) const;
  void check_subset(const SyntheticVideo& video, const FrameIndexSet& subset) const;

  ClassifierKind kind_;
  Matrix prototypes_;
  double temperature_;
  double interaction_strength_;
  KernelConfig kernel_;
  std::unique_ptr<std::atomic<std::uint64_t>> calls_ = std::make_unique<std::atomic<std::uint64_t>>(0);
};

/// Scores many clips of one video against one classifier. Per-frame
/// confidences and pairwise relevances are computed once up front; every
/// clip still counts one call on the classifier and returns exactly what
/// Classifier::classify_clip would. Both referents must outlive the scorer.
class ClipScorer {
 public:
  ClipScorer(const Classifier& classifier, const SyntheticVideo& video);

  std::vector<double> classify_clip(const FrameIndexSet& subset) const;
  /// Unchecked variant for strictly increasing indices below T.
  std::vector<double> classify_clip(std::span<const std::size_t> subset) const;

 private:
  const Classifier& classifier_;
  const SyntheticVideo& video_;
  ConfidenceMatrix confidences_;
  Matrix relevances_;  // upper triangle, penalized kind only
};

}  // namespace framelab
