#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "framelab/classifier.hpp"
#include "framelab/core.hpp"
#include "framelab/policies.hpp"

namespace framelab {

/// Trainable tensors of the sampler. Vectors are stored as 1-row matrices so
/// every tensor can be walked uniformly by the optimizer and the checkpoint
/// writer.
struct SamplerParameters {
  Matrix feature_weight;     // D_in x D_h
  Matrix feature_bias;       // 1 x D_h
  Matrix importance_weight;  // D_h x 1
  Matrix importance_bias;    // 1 x 1
  Matrix class_weight;       // D_h x C
  Matrix class_bias;         // 1 x C

  static constexpr std::array<std::string_view, 6> kNames = {
      "feature_weight", "feature_bias", "importance_weight",
      "importance_bias", "class_weight", "class_bias"};

  std::array<Matrix*, 6> tensors() {
    return {&feature_weight, &feature_bias, &importance_weight,
            &importance_bias, &class_weight, &class_bias};
  }
  std::array<const Matrix*, 6> tensors() const {
    return {&feature_weight, &feature_bias, &importance_weight,
            &importance_bias, &class_weight, &class_bias};
  }

  /// Same shapes, all zeros.
  SamplerParameters zeros_like() const;
  bool operator==(const SamplerParameters&) const = default;
};

struct SamplerShape {
  std::size_t feature_dim = 32;  // D of the raw frames
  std::size_t view_dim = 0;      // 0 means max(1, D / 2)
  std::size_t hidden_dim = 64;
  std::size_t classes = 5;
  double view_noise = 0.1;
  std::uint64_t seed = 0;
};

/// Lightweight sampler: a fixed degraded view of each frame (random
/// projection to D_in dimensions plus Gaussian noise), a ReLU feature layer,
/// a linear importance head and a linear class head.
struct SamplerModel {
  std::size_t feature_dim = 0;
  std::size_t view_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t classes = 0;
  double view_noise = 0.0;
  std::uint64_t seed = 0;
  Matrix projection;  // D_in x D, not trained
  SamplerParameters params;

  /// He-initialized feature layer, small Gaussian heads, zero biases.
  static SamplerModel initialize(const SamplerShape& shape);

  /// Throws std::invalid_argument on any shape inconsistency or non-finite value.
  void validate() const;
  bool operator==(const SamplerModel&) const = default;
};

/// The sampler's degraded T x D_in view of a video. The noise stream is
/// keyed by (model seed, video seed) so the view is fixed per video.
Matrix sampler_view(const SamplerModel& model, const SyntheticVideo& video);

struct SamplerForward {
  Matrix input;                          // T x D_in
  Matrix pre_activation;                 // T x D_h
  Matrix hidden;                         // T x D_h, z_t
  std::vector<double> importance_logits;  // raw h_s(z_t)
  std::vector<double> importance;        // softmax over t
  Matrix frame_logits;                   // T x C
  std::vector<double> video_logits;      // mean of frame logits
  std::vector<double> video_prediction;  // softmax(video_logits)
};

SamplerForward forward(const SamplerModel& model, const SyntheticVideo& video);

struct LossWithGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

enum class RankingForm {
  /// max(gamma - (p_hat_i - p_hat_j), 0): zero once the predicted order
  /// matches the target order with margin gamma.
  Intended,
  /// max(gamma + p_hat_i - p_hat_j, 0), the literal printed sign convention.
  /// Minimizing it reverses the target order; kept for comparison only.
  AsPrinted,
};

/// Pairwise hinge over every ordered pair (i, j) with target p_i > p_j.
/// Gradient is with respect to p_hat; the kink takes the zero branch.
LossWithGradient ranking_loss(std::span<const double> target, std::span<const double> predicted,
                              double gamma, RankingForm form = RankingForm::Intended);

/// Sum of squared differences between softmax(predicted_logits) and the
/// target distribution; gradient with respect to the logits.
LossWithGradient squared_error_loss(std::span<const double> target,
                                    std::span<const double> predicted_logits);

/// -ln(prediction[label]); gradient with respect to the pre-softmax logits,
/// prediction - onehot(label).
LossWithGradient label_guidance_loss(std::span<const double> prediction, std::size_t label);

enum class ImportanceObjective { Ranking, SquaredError };

std::string to_string(ImportanceObjective objective);
ImportanceObjective importance_objective_from_string(const std::string& name);

struct LossConfig {
  double lambda = 0.99;
  double gamma = 0.05;
  AggregationMode mode = AggregationMode::MaxOverClasses;
  ImportanceObjective objective = ImportanceObjective::Ranking;
  RankingForm ranking_form = RankingForm::Intended;

  void validate() const;
};

struct TotalLoss {
  double loss = 0.0;
  double importance_loss = 0.0;
  double label_loss = 0.0;
  SamplerParameters gradient;
};

/// Teacher targets p = softmax_t(c(v_t)) from the frozen classifier's
/// per-frame confidences, aggregated per `mode`.
std::vector<double> teacher_targets(const ConfidenceMatrix& teacher, std::size_t label,
                                    AggregationMode mode);

/// lambda * L_importance + (1 - lambda) * L_label with the full parameter
/// gradient, backpropagated through both heads into the shared feature layer.
TotalLoss total_loss(const SamplerModel& model, const SyntheticVideo& video,
                     const ConfidenceMatrix& teacher, const LossConfig& config);

struct TrainConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  LossConfig loss;
  std::size_t epochs = 60;
  std::size_t batch_size = 4;
  /// N used for the held-out fidelity and confidence columns of the log.
  std::size_t sample_count = 6;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

/// Cosine annealing without warm-up: base at epoch 0, 0 at the final epoch.
double cosine_learning_rate(double base, std::size_t epoch, std::size_t epochs);

/// Momentum SGD with decoupled weight decay, one call per batch.
class MomentumSgd {
 public:
  MomentumSgd(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}

  /// v <- momentum * v + g;  theta <- theta - lr * (v + weight_decay * theta)
  void step(SamplerParameters& params, const SamplerParameters& gradient, double learning_rate);

 private:
  double momentum_;
  double weight_decay_;
  SamplerParameters velocity_;
  bool initialized_ = false;
};

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double heldout_fidelity = 0.0;
  double heldout_confidence = 0.0;
};

struct TrainResult {
  SamplerModel model;
  std::vector<EpochLog> log;
};

class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

/// Precomputed teacher confidences for a set of videos (T classifier calls each).
std::vector<ConfidenceMatrix> teacher_confidences(const Classifier& classifier,
                                                  const std::vector<SyntheticVideo>& videos,
                                                  std::size_t workers = 1);

/// Trains for config.epochs epochs over a per-epoch shuffle derived from the
/// seed and returns the final-epoch model. Held-out fidelity is measured
/// against the semi-optimal policy with the teacher's aggregation mode.
TrainResult train(SamplerModel model, const std::vector<SyntheticVideo>& train_set,
                  const std::vector<SyntheticVideo>& heldout, const Classifier& classifier,
                  const TrainConfig& config);

/// Top-N by predicted importance, then one classifier call on the clip.
PolicyResult infer(const SamplerModel& model, const SyntheticVideo& video, std::size_t n,
                   const Classifier& classifier);

}  // namespace framelab
