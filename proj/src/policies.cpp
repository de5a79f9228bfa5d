#include "framelab/policies.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "framelab/parallel.hpp"
#include "framelab/rng.hpp"

namespace framelab {

std::string to_string(AggregationMode mode) {
  return mode == AggregationMode::TrueLabel ? "label" : "max";
}

AggregationMode aggregation_mode_from_string(const std::string& name) {
  if (name == "label") return AggregationMode::TrueLabel;
  if (name == "max") return AggregationMode::MaxOverClasses;
  throw std::invalid_argument("unknown aggregation mode '" + name + "' (expected label or max)");
}

double aggregate_confidence(std::span<const double> confidence, std::size_t label, AggregationMode mode) {
  if (confidence.empty()) throw std::invalid_argument("aggregate: empty confidence vector");
  if (mode == AggregationMode::TrueLabel) {
    if (label >= confidence.size()) throw std::invalid_argument("aggregate: label out of range");
    return confidence[label];
  }
  return *std::max_element(confidence.begin(), confidence.end());
}

std::vector<double> aggregate_rows(const ConfidenceMatrix& confidences, std::size_t label,
                                   AggregationMode mode) {
  std::vector<double> scores(confidences.rows());
  for (std::size_t t = 0; t < confidences.rows(); ++t) {
    scores[t] = aggregate_confidence(confidences.row(t), label, mode);
  }
  return scores;
}

namespace {

void check_count(std::size_t frame_count, std::size_t n) {
  if (n == 0 || n > frame_count) {
    throw std::invalid_argument("policy requires 1 <= N <= T (N=" + std::to_string(n) +
                                ", T=" + std::to_string(frame_count) + ")");
  }
}

}  // namespace

FrameIndexSet uniform_policy(std::size_t frame_count, std::size_t n) {
  check_count(frame_count, n);
  const std::size_t offset = frame_count / (2 * n);
  std::vector<bool> taken(frame_count, false);
  std::vector<std::size_t> picks;
  picks.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t idx = std::min(k * frame_count / n + offset, frame_count - 1);
    // Shift right to the next free slot, wrapping if the tail is full.
    while (taken[idx]) idx = (idx + 1) % frame_count;
    taken[idx] = true;
    picks.push_back(idx);
  }
  return FrameIndexSet::from_unordered(std::move(picks), frame_count);
}

FrameIndexSet random_policy(std::size_t frame_count, std::size_t n, std::uint64_t seed) {
  check_count(frame_count, n);
  std::vector<std::size_t> pool(frame_count);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first n slots end up a uniform n-subset.
  for (std::size_t k = 0; k < n; ++k) {
    const auto j = std::uniform_int_distribution<std::size_t>(k, frame_count - 1)(rng);
    std::swap(pool[k], pool[j]);
  }
  pool.resize(n);
  return FrameIndexSet::from_unordered(std::move(pool), frame_count);
}

PolicyResult optimal_policy(const Classifier& classifier, const SyntheticVideo& video, std::size_t n,
                            std::uint64_t budget) {
  const std::size_t T = video.frame_count();
  check_count(T, n);
  std::uint64_t candidates = 0;
  try {
    candidates = binomial(T, n);
  } catch (const CapacityError&) {
    throw CapacityError("optimal policy: C(" + std::to_string(T) + ", " + std::to_string(n) +
                        ") exceeds 64 bits and the enumeration budget of " + std::to_string(budget));
  }
  if (candidates > budget) {
    throw CapacityError("optimal policy: C(" + std::to_string(T) + ", " + std::to_string(n) +
                        ") = " + std::to_string(candidates) + " subsets exceeds the enumeration budget of " +
                        std::to_string(budget));
  }

  const ClipScorer scorer(classifier, video);
  std::vector<std::size_t> combo(n);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  std::vector<std::size_t> best_combo = combo;
  PolicyResult best;
  best.policy_name = policy_name(PolicyKind::Optimal);
  best.clip_confidence = -1.0;
  for (;;) {
    const double conf = scorer.classify_clip(combo)[video.label];
    if (conf > best.clip_confidence) {
      best.clip_confidence = conf;
      best_combo = combo;
    }
    // Advance to the next combination in lexicographic order.
    std::size_t i = n;
    while (i > 0 && combo[i - 1] == T - n + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < n; ++j) combo[j] = combo[j - 1] + 1;
  }
  best.selected = FrameIndexSet(std::move(best_combo), T);
  best.classifier_calls = candidates;
  return best;
}

PolicyResult semi_optimal_policy(const Classifier& classifier, const SyntheticVideo& video,
                                 std::size_t n, AggregationMode mode) {
  const std::size_t T = video.frame_count();
  check_count(T, n);
  const auto confidences = classifier.classify_frames(video);
  const auto scores = aggregate_rows(confidences, video.label, mode);
  PolicyResult result;
  result.policy_name = mode == AggregationMode::TrueLabel ? policy_name(PolicyKind::SemiOptimal)
                                                          : policy_name(PolicyKind::SemiOptimalMax);
  result.selected = top_n_indices(scores, n);
  result.classifier_calls = T;
  result.clip_confidence = classifier.classify_clip(video, result.selected)[video.label];
  result.evaluation_calls = 1;
  return result;
}

PolicyResult evaluate_selection(const Classifier& classifier, const SyntheticVideo& video,
                                FrameIndexSet selected, std::string name) {
  PolicyResult result;
  result.policy_name = std::move(name);
  result.clip_confidence = classifier.classify_clip(video, selected)[video.label];
  result.selected = std::move(selected);
  result.classifier_calls = 1;
  return result;
}

double sampling_fidelity(const FrameIndexSet& target, const FrameIndexSet& optimal) {
  if (target.size() != optimal.size() || target.size() == 0) {
    throw std::invalid_argument("fidelity: sets must share a non-zero size (" +
                                std::to_string(target.size()) + " vs " +
                                std::to_string(optimal.size()) + ")");
  }
  std::size_t common = 0;
  for (std::size_t t : target) common += optimal.contains(t) ? 1 : 0;
  return static_cast<double>(common) / static_cast<double>(target.size());
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Uniform: return "uniform";
    case PolicyKind::Random: return "random";
    case PolicyKind::Optimal: return "optimal";
    case PolicyKind::SemiOptimal: return "semi-optimal";
    case PolicyKind::SemiOptimalMax: return "semi-optimal-max";
    case PolicyKind::All: return "all";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  for (auto kind : {PolicyKind::Uniform, PolicyKind::Random, PolicyKind::Optimal,
                    PolicyKind::SemiOptimal, PolicyKind::SemiOptimalMax, PolicyKind::All}) {
    if (policy_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown policy '" + name + "'");
}

PolicyEvaluation evaluate_policies(const Classifier& classifier,
                                   const std::vector<SyntheticVideo>& corpus, std::size_t n,
                                   const std::vector<PolicyKind>& policies,
                                   const EvaluationOptions& options) {
  if (corpus.empty()) throw std::invalid_argument("evaluate_policies: empty corpus");
  if (policies.empty()) throw std::invalid_argument("evaluate_policies: no policies selected");
  const std::size_t T = corpus.front().frame_count();
  for (const auto& v : corpus) {
    if (v.frame_count() != T) throw std::invalid_argument("evaluate_policies: mixed video lengths");
  }
  check_count(T, n);

  PolicyEvaluation eval;
  eval.n = n;
  eval.frame_count = T;

  const bool wants_optimal =
      options.fidelity || std::find(policies.begin(), policies.end(), PolicyKind::Optimal) != policies.end();
  bool optimal_feasible = false;
  if (wants_optimal) {
    try {
      const auto count = binomial(T, n);
      optimal_feasible = count <= options.budget;
      if (!optimal_feasible) {
        eval.optimal_skipped = "skipped: combinatorial budget (C(" + std::to_string(T) + ", " +
                               std::to_string(n) + ") = " + std::to_string(count) + " > " +
                               std::to_string(options.budget) + ")";
      }
    } catch (const CapacityError&) {
      eval.optimal_skipped = "skipped: combinatorial budget (C(" + std::to_string(T) + ", " +
                             std::to_string(n) + ") exceeds 64 bits)";
    }
  }

  struct VideoOutcome {
    std::vector<std::optional<PolicyResult>> results;
    std::optional<FrameIndexSet> optimal_set;
  };
  std::vector<VideoOutcome> outcomes(corpus.size());

  parallel_for(corpus.size(), options.workers, [&](std::size_t k) {
    const auto& video = corpus[k];
    try {
      auto& out = outcomes[k];
      std::optional<PolicyResult> optimal;
      if (optimal_feasible) {
        optimal = optimal_policy(classifier, video, n, options.budget);
        out.optimal_set = optimal->selected;
      }
      for (auto kind : policies) {
        switch (kind) {
          case PolicyKind::Uniform:
            out.results.emplace_back(
                evaluate_selection(classifier, video, uniform_policy(T, n), policy_name(kind)));
            break;
          case PolicyKind::Random:
            out.results.emplace_back(evaluate_selection(
                classifier, video,
                random_policy(T, n, derive_seed(options.random_seed, {stream::kRandomPolicy, k})),
                policy_name(kind)));
            break;
          case PolicyKind::Optimal:
            out.results.push_back(optimal);
            break;
          case PolicyKind::SemiOptimal:
            out.results.emplace_back(semi_optimal_policy(classifier, video, n, AggregationMode::TrueLabel));
            break;
          case PolicyKind::SemiOptimalMax:
            out.results.emplace_back(
                semi_optimal_policy(classifier, video, n, AggregationMode::MaxOverClasses));
            break;
          case PolicyKind::All:
            out.results.emplace_back(
                evaluate_selection(classifier, video, FrameIndexSet::all(T), policy_name(kind)));
            break;
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("video " + std::to_string(k) + " (seed " + std::to_string(video.seed) +
                               "): " + e.what());
    }
  });

  for (std::size_t p = 0; p < policies.size(); ++p) {
    const std::string name = policy_name(policies[p]);
    double conf_sum = 0.0, calls_sum = 0.0, fid_sum = 0.0;
    std::size_t count = 0;
    bool have_fidelity = true;
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      const auto& result = outcomes[k].results[p];
      if (!result) continue;
      VideoPolicyRecord record;
      record.video_index = k;
      record.video_seed = corpus[k].seed;
      record.result = *result;
      // Fidelity needs equal set sizes; the "all" baseline has N = T.
      if (outcomes[k].optimal_set && result->selected.size() == n) {
        record.fidelity = sampling_fidelity(result->selected, *outcomes[k].optimal_set);
        fid_sum += *record.fidelity;
      } else {
        have_fidelity = false;
      }
      conf_sum += result->clip_confidence;
      calls_sum += static_cast<double>(result->classifier_calls);
      ++count;
      eval.records.push_back(std::move(record));
    }
    if (count == 0) continue;
    PolicySummary summary;
    summary.mean_confidence = conf_sum / static_cast<double>(count);
    summary.mean_calls = calls_sum / static_cast<double>(count);
    if (have_fidelity && options.fidelity) summary.mean_fidelity = fid_sum / static_cast<double>(count);
    eval.summary[name] = summary;
  }
  return eval;
}

}  // namespace framelab
