#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framelab/classifier.hpp"
#include "framelab/core.hpp"

namespace framelab {

enum class AggregationMode { TrueLabel, MaxOverClasses };

std::string to_string(AggregationMode mode);
AggregationMode aggregation_mode_from_string(const std::string& name);

/// Collapses one frame's confidence vector to a single importance score.
double aggregate_confidence(std::span<const double> confidence, std::size_t label, AggregationMode mode);

/// Per-frame scores c(v_t) for every row of a T x C confidence matrix.
std::vector<double> aggregate_rows(const ConfidenceMatrix& confidences, std::size_t label,
                                   AggregationMode mode);

struct PolicyResult {
  std::string policy_name;
  FrameIndexSet selected;
  /// Classifier confidence on the true label for the selected clip.
  double clip_confidence = 0.0;
  /// Classifier calls the policy spends to pick its clip and score it:
  /// T for the semi-optimal policy, C(T, N) for the optimal policy, and 1
  /// (the final clip evaluation) for policies that select without the
  /// classifier.
  std::uint64_t classifier_calls = 0;
  /// Calls made after selection that are not part of classifier_calls
  /// (the semi-optimal policy's final clip evaluation).
  std::uint64_t evaluation_calls = 0;
};

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

/// Centered strides: floor(k T / N) + floor(T / 2N), k = 0..N-1, clamped to
/// [0, T) and shifted right past any collision.
FrameIndexSet uniform_policy(std::size_t frame_count, std::size_t n);

/// N of T indices uniformly without replacement.
FrameIndexSet random_policy(std::size_t frame_count, std::size_t n, std::uint64_t seed);

/// Brute force over all C(T, N) subsets in lexicographic order; keeps the
/// first subset reaching the maximal true-label confidence. Throws
/// CapacityError when C(T, N) exceeds `budget`.
PolicyResult optimal_policy(const Classifier& classifier, const SyntheticVideo& video, std::size_t n,
                            std::uint64_t budget = kDefaultEnumerationBudget);

/// Top-N frames by independently scored single-frame confidence.
PolicyResult semi_optimal_policy(const Classifier& classifier, const SyntheticVideo& video,
                                 std::size_t n, AggregationMode mode = AggregationMode::TrueLabel);

/// Scores a fixed selection with one clip call.
PolicyResult evaluate_selection(const Classifier& classifier, const SyntheticVideo& video,
                                FrameIndexSet selected, std::string policy_name);

/// |target ∩ optimal| / N.
double sampling_fidelity(const FrameIndexSet& target, const FrameIndexSet& optimal);

/// Named policies the evaluator knows how to run.
enum class PolicyKind { Uniform, Random, Optimal, SemiOptimal, SemiOptimalMax, All };

std::string policy_name(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

struct PolicySummary {
  double mean_confidence = 0.0;
  /// Absent when the optimal policy could not be enumerated.
  std::optional<double> mean_fidelity;
  double mean_calls = 0.0;
};

struct VideoPolicyRecord {
  std::size_t video_index = 0;
  std::uint64_t video_seed = 0;
  PolicyResult result;
  std::optional<double> fidelity;
};

struct PolicyEvaluation {
  std::size_t n = 0;
  std::size_t frame_count = 0;
  /// Ordered by policy (in request order), then by video index.
  std::vector<VideoPolicyRecord> records;
  std::map<std::string, PolicySummary> summary;
  /// Set when the optimal policy was requested or needed for fidelity but
  /// C(T, N) exceeded the budget.
  std::optional<std::string> optimal_skipped;
};

struct EvaluationOptions {
  std::uint64_t budget = kDefaultEnumerationBudget;
  /// Compute fidelity against the optimal policy (when within budget).
  bool fidelity = true;
  std::size_t workers = 1;
  /// Root seed for the random policy; video k uses derive_seed(seed, {k}).
  std::uint64_t random_seed = 0;
};

/// Runs every requested policy on every video and aggregates corpus means.
/// Per-video work is independent and merged by video index. A failing video
/// aborts the run with an error naming its index and seed.
PolicyEvaluation evaluate_policies(const Classifier& classifier,
                                   const std::vector<SyntheticVideo>& corpus, std::size_t n,
                                   const std::vector<PolicyKind>& policies,
                                   const EvaluationOptions& options = {});

}  // namespace framelab
