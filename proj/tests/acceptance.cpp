// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "framelab/bench.hpp"
#include "framelab/rng.hpp"
#include "framelab/sampler.hpp"
#include "framelab/serialize.hpp"

using namespace framelab;
using namespace framelab::bench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Shared setting of criteria 1-4: default generator, T = 10, seed 0.
struct Setting {
  ExperimentConfig config;
  Matrix prototypes;
  std::vector<SyntheticVideo> corpus;

  explicit Setting(std::size_t videos) {
    prototypes = experiment_prototypes(config);
    corpus = generate_corpus(config.generator, prototypes, videos, derive_seed(config.seed, {stream::kCorpus, 6, 10}));
  }
};

Outcome oracle_equivalence() {
  Setting s(200);
  const auto c = Classifier::additive(s.prototypes);
  double worst = 0.0;
  for (const auto& v : s.corpus) {
    for (std::size_t n : {2u, 4u, 6u}) {
      const double so = semi_optimal_policy(c, v, n).clip_confidence;
      const double o = optimal_policy(c, v, n).clip_confidence;
      worst = std::max(worst, std::abs(so - o));
    }
  }
  return {worst <= 1e-12, fmt("max |conf(pi_s) - conf(pi_o)| = %.3g over 200 videos x N in {2,4,6} (tol 1e-12)", worst)};
}

Outcome fidelity_at_one() {
  Setting s(200);
  const auto add = Classifier::additive(s.prototypes);
  const auto pen = make_classifier(s.config, s.prototypes);
  double lowest = 1.0;
  for (const auto& v : s.corpus) {
    for (const Classifier* c : {&add, &pen}) {
      const auto so = semi_optimal_policy(*c, v, 1).selected;
      const auto o = optimal_policy(*c, v, 1).selected;
      lowest = std::min(lowest, sampling_fidelity(so, o));
    }
  }
  return {lowest == 1.0, fmt("min fidelity(pi_s, pi_o) at N=1 = %.3f over 200 videos x 2 classifier kinds", lowest)};
}

struct InteractionRun {
  PolicyEvaluation evaluation;
  std::vector<SyntheticVideo> corpus;
  double seconds = 0.0;
};

const InteractionRun& interaction_run() {
  static const InteractionRun run = [] {
    InteractionRun r;
    const auto start = std::chrono::steady_clock::now();
    Setting s(500);
    const auto classifier = make_classifier(s.config, s.prototypes);
    EvaluationOptions options;
    options.random_seed = derive_seed(s.config.seed, {stream::kRandomPolicy, 6, 10});
    r.evaluation = evaluate_policies(classifier, s.corpus, 6,
                                     {PolicyKind::Uniform, PolicyKind::Random, PolicyKind::Optimal,
                                      PolicyKind::SemiOptimal},
                                     options);
    r.corpus = s.corpus;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }();
  return run;
}

Outcome policy_ordering() {
  const auto& run = interaction_run();
  const auto& sum = run.evaluation.summary;
  const double o = sum.at("optimal").mean_confidence;
  const double s = sum.at("semi-optimal").mean_confidence;
  const double u = sum.at("uniform").mean_confidence;
  const bool pass = o - s > 0.005 && s - u > 0.005 && run.seconds < 60.0;
  return {pass, fmt("pi_o %.4f, pi_s %.4f, pi_u %.4f; gaps o-s %.4f, s-u %.4f (each must exceed 0.005); %.1f s",
                    o, s, u, o - s, s - u, run.seconds)};
}

Outcome fidelity_above_chance() {
  const auto& run = interaction_run();
  const double n_over_t = 0.6;
  const double fid_s = run.evaluation.summary.at("semi-optimal").mean_fidelity.value();

  std::map<std::size_t, FrameIndexSet> optimal;
  for (const auto& rec : run.evaluation.records) {
    if (rec.result.policy_name == "optimal") optimal.emplace(rec.video_index, rec.result.selected);
  }
  // 10,000 random draws: 20 per video against that video's optimal set.
  double fid_r = 0.0;
  std::size_t draws = 0;
  for (std::size_t k = 0; k < run.corpus.size(); ++k) {
    for (std::uint64_t d = 0; d < 20; ++d) {
      fid_r += sampling_fidelity(random_policy(10, 6, derive_seed(run.corpus[k].seed, {stream::kRandomPolicy, d})),
                                 optimal.at(k));
      ++draws;
    }
  }
  fid_r /= static_cast<double>(draws);
  const bool pass = fid_s > n_over_t + 0.1 && std::abs(fid_r - n_over_t) <= 0.03;
  return {pass, fmt("fidelity(pi_s, pi_o) %.4f (> 0.7); random fidelity %.4f over %zu draws (0.6 +- 0.03)", fid_s,
                    fid_r, draws)};
}

Outcome gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  const auto prototypes = experiment_prototypes(config);
  const auto classifier = make_classifier(config, prototypes);
  const auto corpus = generate_corpus(config.generator, prototypes, 10, derive_seed(99, {stream::kCorpus}));
  double worst = 0.0;
  for (std::size_t draw = 0; draw < corpus.size(); ++draw) {
    SamplerShape shape;
    shape.seed = derive_seed(99, {stream::kModelInit, draw});
    auto model = SamplerModel::initialize(shape);
    const auto& video = corpus[draw];
    const auto teacher = classifier.classify_frames(video);
    for (double lambda : {0.0, 0.99, 1.0}) {
      LossConfig loss;
      loss.lambda = lambda;
      const auto base = total_loss(model, video, teacher, loss);
      // Relative error with the denominator floored at the finite-difference
      // roundoff scale, eps * |loss| / h, times 1e6 of headroom.
      const double floor = 1e-4 * std::max(1.0, std::abs(base.loss));
      auto params = model.params.tensors();
      const auto grads = base.gradient.tensors();
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto& theta = params[k]->data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
          const double saved = theta[i];
          theta[i] = saved + 1e-6;
          const double up = total_loss(model, video, teacher, loss).loss;
          theta[i] = saved - 1e-6;
          const double down = total_loss(model, video, teacher, loss).loss;
          theta[i] = saved;
          const double numeric = (up - down) / 2e-6;
          const double analytic = grads[k]->data()[i];
          const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
          worst = std::max(worst, std::abs(analytic - numeric) / scale);
        }
      }
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-5 && seconds < 5.0,
          fmt("worst relative error %.3g over 10 draws x lambda in {0, 0.99, 1}, every parameter (tol 1e-5); %.1f s",
              worst, seconds)};
}

const ComparisonRow& row_named(const SamplerReport& report, const std::string& name) {
  for (const auto& row : report.comparison) {
    if (row.policy == name) return row;
  }
  throw std::runtime_error("comparison has no row " + name);
}

Outcome training_efficacy() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig config;
  const auto report = run_sampler_experiment(config, {});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& sampler = row_named(report, "sampler");
  const auto& uniform = row_named(report, "uniform");
  const bool pass = sampler.fidelity_to_semi_optimal >= 0.75 && sampler.mean_confidence >= uniform.mean_confidence &&
                    seconds < 300.0;
  return {pass, fmt("held-out fidelity to pi_s %.4f (>= 0.75; random baseline 0.6); confidence %.4f vs pi_u %.4f; "
                    "%.1f s",
                    sampler.fidelity_to_semi_optimal, sampler.mean_confidence, uniform.mean_confidence, seconds)};
}

Outcome complexity_accounting() {
  ExperimentConfig config;
  config.policy_grid.cells = {{6, 10}, {16, 60}};
  config.policy_grid.videos = 50;
  config.policy_grid.policies = {PolicyKind::Optimal, PolicyKind::SemiOptimal};
  const auto report = run_policy_grid(config, {});
  const auto& cells = report.summary.at("cells");
  const auto& small = cells.at(0).at("policies");
  const auto& large = cells.at(1).at("policies");
  const double o_small = small.at("optimal").at("mean_calls").get<double>();
  const double s_small = small.at("semi-optimal").at("mean_calls").get<double>();
  const std::string o_large = large.at("optimal").at("status").get<std::string>();
  const std::string s_large_status = large.at("semi-optimal").at("status").get<std::string>();
  const double s_large = large.at("semi-optimal").at("mean_calls").get<double>();

  bool exact = true;
  for (const auto& rec : report.cells[0].evaluation.records) {
    const auto calls = rec.result.classifier_calls;
    if (rec.result.policy_name == "optimal" && calls != 210) exact = false;
    if (rec.result.policy_name == "semi-optimal" && calls != 10) exact = false;
  }
  for (const auto& rec : report.cells[1].evaluation.records) {
    if (rec.result.policy_name == "semi-optimal" && rec.result.classifier_calls != 60) exact = false;
  }
  const bool pass = exact && o_small == 210.0 && s_small == 10.0 && o_large.rfind("skipped", 0) == 0 &&
                    s_large_status == "ok" && s_large == 60.0;
  return {pass, fmt("(6,10): pi_o %.0f calls, pi_s %.0f calls per video; (16,60): pi_o \"%s\", pi_s %.0f calls",
                    o_small, s_small, o_large.c_str(), s_large)};
}

Outcome redundancy_monotonicity() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  config.redundancy.rhos = {0.0, 0.5, 0.9, 0.99};
  config.redundancy.videos_per_cell = 200;
  const auto report = run_redundancy_study(config, {});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& cells = report.sweep.cells;
  bool increasing = true;
  std::string means;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0 && !(cells[k].mean > cells[k - 1].mean)) increasing = false;
    means += fmt("%s%.4f", k ? ", " : "", cells[k].mean);
  }
  const double rise = cells.back().mean - cells.front().mean;
  return {increasing && rise > 0.2 && seconds < 60.0,
          fmt("mean relevance at rho 0/0.5/0.9/0.99: %s; rise %.4f (> 0.2); %.1f s", means.c_str(), rise, seconds)};
}

Outcome ablation_structure() {
  ExperimentConfig config;
  config.sampler.ablation = true;
  const auto report = run_sampler_experiment(config, {});
  auto find = [&](ImportanceObjective obj, AggregationMode mode, bool lg) -> const AblationRow& {
    for (const auto& row : report.ablation) {
      if (row.objective == obj && row.mode == mode && row.label_guidance == lg) return row;
    }
    throw std::runtime_error("ablation row missing");
  };
  bool ranking_wins = true;
  bool guidance_ok = true;
  double worst_rank_margin = 1.0;
  double worst_lg_drop = -1.0;
  for (auto mode : {AggregationMode::TrueLabel, AggregationMode::MaxOverClasses}) {
    for (bool lg : {false, true}) {
      const double diff = find(ImportanceObjective::Ranking, mode, lg).heldout_confidence -
                          find(ImportanceObjective::SquaredError, mode, lg).heldout_confidence;
      worst_rank_margin = std::min(worst_rank_margin, diff);
      if (diff < 0.0) ranking_wins = false;
    }
  }
  for (auto obj : {ImportanceObjective::SquaredError, ImportanceObjective::Ranking}) {
    for (auto mode : {AggregationMode::TrueLabel, AggregationMode::MaxOverClasses}) {
      const double drop = find(obj, mode, false).heldout_confidence - find(obj, mode, true).heldout_confidence;
      worst_lg_drop = std::max(worst_lg_drop, drop);
      if (drop > 0.005) guidance_ok = false;
    }
  }
  return {report.ablation.size() == 8 && ranking_wins && guidance_ok,
          fmt("%zu rows; min(ranking - mse) held-out confidence %.4f (>= 0); max drop from adding L_LG %.4f "
              "(<= 0.005)",
              report.ablation.size(), worst_rank_margin, worst_lg_drop)};
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files[std::filesystem::relative(entry.path(), dir).string()] = s.str();
  }
  return files;
}

Outcome determinism() {
  ExperimentConfig config;
  config.seed = 17;
  config.policy_grid.cells = {{6, 10}, {16, 60}};
  config.policy_grid.videos = 100;
  config.policy_grid.policies = {PolicyKind::Uniform, PolicyKind::Random, PolicyKind::Optimal,
                                 PolicyKind::SemiOptimal, PolicyKind::SemiOptimalMax, PolicyKind::All};
  config.sampler.train_videos = 60;
  config.sampler.heldout_videos = 30;
  config.sampler.train.epochs = 10;
  config.sampler.ablation = true;
  config.sampler.lambda_sweep = {0.0, 0.5, 1.0};

  const auto root = std::filesystem::temp_directory_path() / "framelab_acceptance";
  std::filesystem::remove_all(root);
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / ("run" + std::to_string(run));
    run_policy_grid(config, dir / "policy-grid");
    run_redundancy_study(config, dir / "redundancy");
    run_sampler_experiment(config, dir / "train");
    runs.push_back(read_tree(dir));
  }
  std::size_t differing = 0;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) ++differing;
  }
  if (runs[1].size() != runs[0].size()) ++differing;
  std::filesystem::remove_all(root);
  return {differing == 0 && !runs[0].empty(),
          fmt("%zu output files from policy-grid, redundancy and train; %zu differ between runs", runs[0].size(),
              differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence (additive)", oracle_equivalence},
      {"fidelity identity at N=1", fidelity_at_one},
      {"policy ordering (interaction regime)", policy_ordering},
      {"fidelity above chance", fidelity_above_chance},
      {"gradient check", gradient_check},
      {"training efficacy", training_efficacy},
      {"complexity accounting", complexity_accounting},
      {"redundancy monotonicity", redundancy_monotonicity},
      {"ablation structure", ablation_structure},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed;
}
