#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "framelab/classifier.hpp"
#include "framelab/policies.hpp"
#include "framelab/redundancy.hpp"
#include "framelab/sampler.hpp"

namespace framelab::bench {

/// Malformed or out-of-range experiment configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct GridCell {
  std::size_t n = 0;
  std::size_t frames = 0;
};

/// The (N, T) pairs of the long-video experiments: (6,10), (8,30), (16,60), (32,100).
std::vector<GridCell> paper_grid_preset();

struct ClassifierSettings {
  ClassifierKind kind = ClassifierKind::RedundancyPenalized;
  double interaction_strength = 0.5;
  double temperature = 1.0;
  /// Relevance bandwidth for the redundancy penalty; sqrt(D) when absent.
  std::optional<double> kernel_bandwidth;
};

struct PolicyGridSettings {
  std::vector<GridCell> cells = {{6, 10}};
  std::size_t videos = 500;
  std::vector<PolicyKind> policies = {PolicyKind::Uniform, PolicyKind::Random, PolicyKind::Optimal,
                                      PolicyKind::SemiOptimal};
  std::uint64_t budget = kDefaultEnumerationBudget;
  bool fidelity = true;
};

struct RedundancySettings {
  std::vector<double> rhos = {0.0, 0.5, 0.9, 0.99};
  std::size_t videos_per_cell = 200;
};

struct SamplerSettings {
  std::size_t train_videos = 200;
  std::size_t heldout_videos = 100;
  std::size_t n = 6;
  std::size_t hidden_dim = 64;
  double view_noise = 0.1;
  TrainConfig train;
  bool ablation = false;
  std::vector<double> lambda_sweep;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  GeneratorConfig generator;
  ClassifierSettings classifier;
  PolicyGridSettings policy_grid;
  RedundancySettings redundancy;
  SamplerSettings sampler;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Parses a config document; missing keys take defaults, unknown keys are
/// rejected. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& doc);
/// The fully resolved config, echoed into every report.
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Class prototypes shared by every corpus of an experiment.
Matrix experiment_prototypes(const ExperimentConfig& config);
Classifier make_classifier(const ExperimentConfig& config, const Matrix& prototypes);

struct GridCellReport {
  GridCell cell;
  std::uint64_t corpus_seed = 0;
  PolicyEvaluation evaluation;
};

struct PolicyGridReport {
  std::vector<GridCellReport> cells;
  nlohmann::json summary;
};

/// Evaluates the configured policies on a fresh corpus per (N, T) cell.
/// Writes cell_N<N>_T<T>.csv per cell and policy_grid.json to `out` (when
/// non-empty). Cells whose optimal policy exceeds the enumeration budget
/// report it as skipped and still run every other policy.
PolicyGridReport run_policy_grid(const ExperimentConfig& config, const std::filesystem::path& out);

struct RedundancyReport {
  RedundancySweep sweep;
  nlohmann::json summary;
};

/// Writes redundancy.json and redundancy_pairs.csv.
RedundancyReport run_redundancy_study(const ExperimentConfig& config, const std::filesystem::path& out);

struct ComparisonRow {
  std::string policy;
  double mean_confidence = 0.0;
  std::optional<double> fidelity_to_optimal;
  double fidelity_to_semi_optimal = 0.0;
  double mean_calls = 0.0;
};

struct AblationRow {
  ImportanceObjective objective = ImportanceObjective::Ranking;
  AggregationMode mode = AggregationMode::MaxOverClasses;
  bool label_guidance = true;
  double lambda = 0.0;
  double heldout_confidence = 0.0;
  double heldout_fidelity = 0.0;  // vs the semi-optimal policy in the configured mode
  double final_train_loss = 0.0;
};

struct SamplerReport {
  TrainResult training;
  std::vector<ComparisonRow> comparison;
  std::vector<AblationRow> ablation;
  std::vector<AblationRow> lambda_sweep;
  nlohmann::json summary;
};

/// Trains the sampler, compares it on the held-out corpus with the uniform,
/// random, semi-optimal and (within budget) optimal policies, and optionally
/// runs the 8-configuration loss ablation and a lambda sweep. Writes
/// training_log.csv, checkpoint.json, comparison.csv, sampler.json and,
/// when requested, ablation.csv / lambda_sweep.csv.
SamplerReport run_sampler_experiment(const ExperimentConfig& config, const std::filesystem::path& out);

/// One RFC-4180 field: quoted only when it contains a comma, quote or line break.
std::string csv_field(const std::string& value);

}  // namespace framelab::bench
