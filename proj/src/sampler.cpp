#include "framelab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "framelab/parallel.hpp"
#include "framelab/rng.hpp"

namespace framelab {

SamplerParameters SamplerParameters::zeros_like() const {
  SamplerParameters out;
  auto dst = out.tensors();
  auto src = tensors();
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = Matrix(src[i]->rows(), src[i]->cols());
  return out;
}

SamplerModel SamplerModel::initialize(const SamplerShape& shape) {
  if (shape.feature_dim < 1 || shape.hidden_dim < 1 || shape.classes < 1) {
    throw std::invalid_argument("sampler: D, D_h and C must be at least 1");
  }
  if (!(shape.view_noise >= 0.0)) throw std::invalid_argument("sampler: view_noise must be non-negative");
  SamplerModel m;
  m.feature_dim = shape.feature_dim;
  m.view_dim = shape.view_dim > 0 ? shape.view_dim : std::max<std::size_t>(1, shape.feature_dim / 2);
  m.hidden_dim = shape.hidden_dim;
  m.classes = shape.classes;
  m.view_noise = shape.view_noise;
  m.seed = shape.seed;

  std::normal_distribution<double> normal;
  Rng proj_rng(derive_seed(shape.seed, {stream::kProjection}));
  m.projection = Matrix(m.view_dim, m.feature_dim);
  const double proj_scale = 1.0 / std::sqrt(static_cast<double>(m.view_dim));
  for (double& v : m.projection.data()) v = proj_scale * normal(proj_rng);

  Rng rng(derive_seed(shape.seed, {stream::kModelInit}));
  auto& p = m.params;
  p.feature_weight = Matrix(m.view_dim, m.hidden_dim);
  const double he = std::sqrt(2.0 / static_cast<double>(m.view_dim));
  for (double& v : p.feature_weight.data()) v = he * normal(rng);
  p.feature_bias = Matrix(1, m.hidden_dim);
  const double head = 1.0 / std::sqrt(static_cast<double>(m.hidden_dim));
  p.importance_weight = Matrix(m.hidden_dim, 1);
  for (double& v : p.importance_weight.data()) v = head * normal(rng);
  p.importance_bias = Matrix(1, 1);
  p.class_weight = Matrix(m.hidden_dim, m.classes);
  for (double& v : p.class_weight.data()) v = head * normal(rng);
  p.class_bias = Matrix(1, m.classes);
  return m;
}

void SamplerModel::validate() const {
  auto expect = [](const Matrix& m, std::size_t r, std::size_t c, std::string_view name) {
    if (m.rows() != r || m.cols() != c) {
      throw std::invalid_argument("sampler: tensor " + std::string(name) + " is " +
                                  std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                  ", expected " + std::to_string(r) + "x" + std::to_string(c));
    }
    for (double v : m.data()) {
      if (!std::isfinite(v)) throw std::invalid_argument("sampler: non-finite value in " + std::string(name));
    }
  };
  expect(projection, view_dim, feature_dim, "projection");
  expect(params.feature_weight, view_dim, hidden_dim, "feature_weight");
  expect(params.feature_bias, 1, hidden_dim, "feature_bias");
  expect(params.importance_weight, hidden_dim, 1, "importance_weight");
  expect(params.importance_bias, 1, 1, "importance_bias");
  expect(params.class_weight, hidden_dim, classes, "class_weight");
  expect(params.class_bias, 1, classes, "class_bias");
}

Matrix sampler_view(const SamplerModel& model, const SyntheticVideo& video) {
  if (video.dim() != model.feature_dim) {
    throw std::invalid_argument("sampler: video has D=" + std::to_string(video.dim()) +
                                " but the model expects D=" + std::to_string(model.feature_dim));
  }
  const std::size_t T = video.frame_count();
  Matrix view(T, model.view_dim);
  Rng rng(derive_seed(model.seed, {stream::kViewNoise, video.seed}));
  std::normal_distribution<double> normal;
  for (std::size_t t = 0; t < T; ++t) {
    const auto x = video.frame(t);
    for (std::size_t i = 0; i < model.view_dim; ++i) {
      const auto p = model.projection.row(i);
      double dot = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) dot += p[d] * x[d];
      view(t, i) = dot + model.view_noise * normal(rng);
    }
  }
  return view;
}

SamplerForward forward(const SamplerModel& model, const SyntheticVideo& video) {
  const auto& p = model.params;
  SamplerForward f;
  f.input = sampler_view(model, video);
  const std::size_t T = video.frame_count();
  const std::size_t H = model.hidden_dim;
  const std::size_t C = model.classes;
  f.pre_activation = Matrix(T, H);
  f.hidden = Matrix(T, H);
  f.importance_logits.assign(T, 0.0);
  f.frame_logits = Matrix(T, C);
  f.video_logits.assign(C, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const auto x = f.input.row(t);
    for (std::size_t h = 0; h < H; ++h) {
      double a = p.feature_bias(0, h);
      for (std::size_t i = 0; i < x.size(); ++i) a += x[i] * p.feature_weight(i, h);
      f.pre_activation(t, h) = a;
      f.hidden(t, h) = a > 0.0 ? a : 0.0;
    }
    const auto z = f.hidden.row(t);
    double s = p.importance_bias(0, 0);
    for (std::size_t h = 0; h < H; ++h) s += z[h] * p.importance_weight(h, 0);
    f.importance_logits[t] = s;
    for (std::size_t c = 0; c < C; ++c) {
      double l = p.class_bias(0, c);
      for (std::size_t h = 0; h < H; ++h) l += z[h] * p.class_weight(h, c);
      f.frame_logits(t, c) = l;
      f.video_logits[c] += l;
    }
  }
  for (double& l : f.video_logits) l /= static_cast<double>(T);
  f.importance = softmax(f.importance_logits);
  f.video_prediction = softmax(f.video_logits);
  return f;
}

LossWithGradient ranking_loss(std::span<const double> target, std::span<const double> predicted,
                              double gamma, RankingForm form) {
  if (target.size() != predicted.size()) {
    throw std::invalid_argument("ranking loss: length mismatch (" + std::to_string(target.size()) +
                                " vs " + std::to_string(predicted.size()) + ")");
  }
  if (target.size() < 2) throw std::invalid_argument("ranking loss: needs at least two frames");
  if (!(gamma >= 0.0)) throw std::invalid_argument("ranking loss: gamma must be non-negative");
  LossWithGradient out{0.0, std::vector<double>(target.size(), 0.0)};
  for (std::size_t i = 0; i < target.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (!(target[i] > target[j])) continue;
      const double gap = predicted[i] - predicted[j];
      if (form == RankingForm::Intended) {
        const double hinge = gamma - gap;
        if (hinge > 0.0) {
          out.loss += hinge;
          out.gradient[i] -= 1.0;
          out.gradient[j] += 1.0;
        }
      } else {
        const double hinge = gamma + gap;
        if (hinge > 0.0) {
          out.loss += hinge;
          out.gradient[i] += 1.0;
          out.gradient[j] -= 1.0;
        }
      }
    }
  }
  return out;
}

LossWithGradient squared_error_loss(std::span<const double> target,
                                    std::span<const double> predicted_logits) {
  if (target.size() != predicted_logits.size()) {
    throw std::invalid_argument("squared error loss: length mismatch");
  }
  const auto q = softmax(predicted_logits);
  LossWithGradient out{0.0, std::vector<double>(q.size(), 0.0)};
  std::vector<double> dq(q.size());
  double inner = 0.0;
  for (std::size_t t = 0; t < q.size(); ++t) {
    const double diff = q[t] - target[t];
    out.loss += diff * diff;
    dq[t] = 2.0 * diff;
    inner += dq[t] * q[t];
  }
  // Softmax Jacobian-vector product: dq/ds = diag(q) - q q^T.
  for (std::size_t t = 0; t < q.size(); ++t) out.gradient[t] = q[t] * (dq[t] - inner);
  return out;
}

LossWithGradient label_guidance_loss(std::span<const double> prediction, std::size_t label) {
  if (label >= prediction.size()) {
    throw std::invalid_argument("label guidance: label " + std::to_string(label) +
                                " out of range for C=" + std::to_string(prediction.size()));
  }
  LossWithGradient out{-std::log(prediction[label]),
                       std::vector<double>(prediction.begin(), prediction.end())};
  out.gradient[label] -= 1.0;
  return out;
}

std::string to_string(ImportanceObjective objective) {
  return objective == ImportanceObjective::Ranking ? "ranking" : "mse";
}

ImportanceObjective importance_objective_from_string(const std::string& name) {
  if (name == "ranking") return ImportanceObjective::Ranking;
  if (name == "mse") return ImportanceObjective::SquaredError;
  throw std::invalid_argument("unknown importance objective '" + name + "' (expected ranking or mse)");
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("loss: lambda must lie in [0, 1]");
  if (!(gamma >= 0.0)) throw std::invalid_argument("loss: gamma must be non-negative");
}

std::vector<double> teacher_targets(const ConfidenceMatrix& teacher, std::size_t label,
                                    AggregationMode mode) {
  return softmax(aggregate_rows(teacher, label, mode));
}

TotalLoss total_loss(const SamplerModel& model, const SyntheticVideo& video,
                     const ConfidenceMatrix& teacher, const LossConfig& config) {
  config.validate();
  const std::size_t T = video.frame_count();
  if (teacher.rows() != T) {
    throw std::invalid_argument("total loss: teacher has " + std::to_string(teacher.rows()) +
                                " rows for a " + std::to_string(T) + "-frame video");
  }
  if (teacher.cols() != model.classes) throw std::invalid_argument("total loss: teacher has wrong C");
  const auto f = forward(model, video);
  const auto targets = teacher_targets(teacher, video.label, config.mode);

  const auto importance = config.objective == ImportanceObjective::Ranking
                              ? ranking_loss(targets, f.importance_logits, config.gamma, config.ranking_form)
                              : squared_error_loss(targets, f.importance_logits);
  const auto label = label_guidance_loss(f.video_prediction, video.label);

  const double lambda = config.lambda;
  TotalLoss out;
  out.importance_loss = importance.loss;
  out.label_loss = label.loss;
  out.loss = lambda * importance.loss + (1.0 - lambda) * label.loss;

  const auto& p = model.params;
  auto& g = out.gradient;
  g = p.zeros_like();
  const std::size_t H = model.hidden_dim;
  const std::size_t C = model.classes;
  const std::size_t I = model.view_dim;

  // Each frame logit enters the video logits with weight 1/T.
  std::vector<double> d_frame_logit(C);
  for (std::size_t c = 0; c < C; ++c) {
    d_frame_logit[c] = (1.0 - lambda) * label.gradient[c] / static_cast<double>(T);
    g.class_bias(0, c) = (1.0 - lambda) * label.gradient[c];
  }
  std::vector<double> d_hidden(H);
  for (std::size_t t = 0; t < T; ++t) {
    const double d_score = lambda * importance.gradient[t];
    const auto z = f.hidden.row(t);
    g.importance_bias(0, 0) += d_score;
    for (std::size_t h = 0; h < H; ++h) {
      g.importance_weight(h, 0) += z[h] * d_score;
      double dz = p.importance_weight(h, 0) * d_score;
      for (std::size_t c = 0; c < C; ++c) {
        g.class_weight(h, c) += z[h] * d_frame_logit[c];
        dz += p.class_weight(h, c) * d_frame_logit[c];
      }
      d_hidden[h] = f.pre_activation(t, h) > 0.0 ? dz : 0.0;
    }
    const auto x = f.input.row(t);
    for (std::size_t h = 0; h < H; ++h) {
      g.feature_bias(0, h) += d_hidden[h];
      for (std::size_t i = 0; i < I; ++i) g.feature_weight(i, h) += x[i] * d_hidden[h];
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("train: momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("train: weight_decay must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be at least 1");
  if (sample_count < 1) throw std::invalid_argument("train: sample_count must be at least 1");
  loss.validate();
}

double cosine_learning_rate(double base, std::size_t epoch, std::size_t epochs) {
  if (epochs <= 1) return base;
  const double progress = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return 0.5 * base * (1.0 + std::cos(std::numbers::pi * progress));
}

void MomentumSgd::step(SamplerParameters& params, const SamplerParameters& gradient, double learning_rate) {
  if (!initialized_) {
    velocity_ = params.zeros_like();
    initialized_ = true;
  }
  auto theta = params.tensors();
  auto grad = gradient.tensors();
  auto vel = velocity_.tensors();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto& th = theta[k]->data();
    const auto& gr = grad[k]->data();
    auto& v = vel[k]->data();
    for (std::size_t i = 0; i < th.size(); ++i) {
      v[i] = momentum_ * v[i] + gr[i];
      th[i] -= learning_rate * (v[i] + weight_decay_ * th[i]);
    }
  }
}

std::vector<ConfidenceMatrix> teacher_confidences(const Classifier& classifier,
                                                  const std::vector<SyntheticVideo>& videos,
                                                  std::size_t workers) {
  std::vector<ConfidenceMatrix> out(videos.size());
  parallel_for(videos.size(), workers, [&](std::size_t k) { out[k] = classifier.classify_frames(videos[k]); });
  return out;
}

PolicyResult infer(const SamplerModel& model, const SyntheticVideo& video, std::size_t n,
                   const Classifier& classifier) {
  if (n == 0 || n > video.frame_count()) {
    throw std::invalid_argument("infer: requires 1 <= N <= T");
  }
  const auto f = forward(model, video);
  return evaluate_selection(classifier, video, top_n_indices(f.importance, n), "sampler");
}

namespace {

void accumulate(SamplerParameters& into, const SamplerParameters& from, double scale) {
  auto dst = into.tensors();
  auto src = from.tensors();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    auto& d = dst[k]->data();
    const auto& s = src[k]->data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
  }
}

struct HeldoutScore {
  double fidelity = 0.0;
  double confidence = 0.0;
};

HeldoutScore score_heldout(const SamplerModel& model, const std::vector<SyntheticVideo>& heldout,
                           const std::vector<FrameIndexSet>& targets, const Classifier& classifier,
                           std::size_t n, std::size_t workers) {
  if (heldout.empty()) return {};
  std::vector<HeldoutScore> per(heldout.size());
  parallel_for(heldout.size(), workers, [&](std::size_t k) {
    const auto result = infer(model, heldout[k], n, classifier);
    per[k] = {sampling_fidelity(result.selected, targets[k]), result.clip_confidence};
  });
  HeldoutScore total;
  for (const auto& s : per) {
    total.fidelity += s.fidelity;
    total.confidence += s.confidence;
  }
  total.fidelity /= static_cast<double>(per.size());
  total.confidence /= static_cast<double>(per.size());
  return total;
}

}  // namespace

TrainResult train(SamplerModel model, const std::vector<SyntheticVideo>& train_set,
                  const std::vector<SyntheticVideo>& heldout, const Classifier& classifier,
                  const TrainConfig& config) {
  config.validate();
  model.validate();
  TrainResult result;
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }
  if (train_set.empty()) throw std::invalid_argument("train: empty training corpus");

  const auto teachers = teacher_confidences(classifier, train_set, config.workers);
  std::vector<FrameIndexSet> heldout_targets;
  heldout_targets.reserve(heldout.size());
  for (const auto& video : heldout) {
    const auto confidences = classifier.classify_frames(video);
    heldout_targets.push_back(
        top_n_indices(aggregate_rows(confidences, video.label, config.loss.mode), config.sample_count));
  }

  MomentumSgd optimizer(config.momentum, config.weight_decay);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_learning_rate(config.learning_rate, epoch, config.epochs);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(config.seed, {stream::kShuffle, epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<TotalLoss> parts(stop - start);
      parallel_for(parts.size(), config.workers, [&](std::size_t b) {
        const std::size_t k = order[start + b];
        parts[b] = total_loss(model, train_set[k], teachers[k], config.loss);
      });
      SamplerParameters batch_grad = model.params.zeros_like();
      const double scale = 1.0 / static_cast<double>(parts.size());
      double batch_loss = 0.0;
      for (const auto& part : parts) {
        batch_loss += part.loss;
        accumulate(batch_grad, part.gradient, scale);
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index) + ", learning rate " + std::to_string(lr));
      }
      epoch_loss += batch_loss;
      optimizer.step(model.params, batch_grad, lr);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.learning_rate = lr;
    entry.train_loss = epoch_loss / static_cast<double>(train_set.size());
    const auto score =
        score_heldout(model, heldout, heldout_targets, classifier, config.sample_count, config.workers);
    entry.heldout_fidelity = score.fidelity;
    entry.heldout_confidence = score.confidence;
    result.log.push_back(entry);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace framelab
