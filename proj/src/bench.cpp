#include "framelab/bench.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "framelab/rng.hpp"
#include "framelab/serialize.hpp"

namespace framelab::bench {

using nlohmann::json;

namespace {

constexpr const char* kCrlf = "\r\n";

// Reads one JSON object section, remembering which keys were consumed so
// that typos surface as errors instead of silently falling back to defaults.
class Section {
 public:
  Section(const json& doc, std::string path) : path_(std::move(path)) {
    if (doc.is_null()) return;
    if (!doc.is_object()) throw ConfigError(path_ + " must be a JSON object");
    doc_ = &doc;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!doc_ || !doc_->contains(key)) return;
    seen_.insert(key);
    try {
      out = doc_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  void read_optional(const std::string& key, std::optional<double>& out) {
    if (!doc_ || !doc_->contains(key)) return;
    seen_.insert(key);
    const auto& v = doc_->at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(path_ + "." + key + " must be a number or null");
    }
  }

  const json* child(const std::string& key) {
    if (!doc_ || !doc_->contains(key)) return nullptr;
    seen_.insert(key);
    return &doc_->at(key);
  }

  void finish() const {
    if (!doc_) return;
    for (const auto& item : doc_->items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown key " + path_ + "." + item.key());
    }
  }

 private:
  const json* doc_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto as_config_error(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string csv_number(double v) { return format_double(v); }

std::string cell_file_name(const GridCell& cell) {
  return "cell_N" + std::to_string(cell.n) + "_T" + std::to_string(cell.frames) + ".csv";
}

json binomial_json(std::size_t t, std::size_t n) {
  try {
    return binomial(t, n);
  } catch (const CapacityError&) {
    return "exceeds 64 bits";
  }
}

}  // namespace

std::vector<GridCell> paper_grid_preset() { return {{6, 10}, {8, 30}, {16, 60}, {32, 100}}; }

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void ExperimentConfig::validate() const {
  as_config_error("generator", [&] { generator.validate(); });
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(classifier.temperature > 0.0)) throw ConfigError("classifier.temperature must be positive");
  if (!(classifier.interaction_strength >= 0.0)) {
    throw ConfigError("classifier.interaction_strength must be non-negative");
  }
  if (classifier.kernel_bandwidth && !(*classifier.kernel_bandwidth > 0.0)) {
    throw ConfigError("classifier.kernel_bandwidth must be positive");
  }
  if (policy_grid.cells.empty()) throw ConfigError("policy_grid.cells must not be empty");
  for (const auto& cell : policy_grid.cells) {
    if (cell.n < 1 || cell.n > cell.frames) {
      throw ConfigError("policy_grid cell (N=" + std::to_string(cell.n) + ", T=" + std::to_string(cell.frames) +
                        ") violates 1 <= N <= T");
    }
  }
  if (policy_grid.videos < 1) throw ConfigError("policy_grid.videos must be at least 1");
  if (policy_grid.policies.empty()) throw ConfigError("policy_grid.policies must not be empty");
  if (redundancy.videos_per_cell < 1) throw ConfigError("redundancy.videos_per_cell must be at least 1");
  for (double rho : redundancy.rhos) {
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("redundancy.rhos entries must lie in [0, 1)");
  }
  if (sampler.n < 1 || sampler.n > generator.frames) {
    throw ConfigError("sampler.N must satisfy 1 <= N <= generator.T");
  }
  if (sampler.train_videos < 1) throw ConfigError("sampler.train_videos must be at least 1");
  if (sampler.hidden_dim < 1) throw ConfigError("sampler.hidden_dim must be at least 1");
  if (!(sampler.view_noise >= 0.0)) throw ConfigError("sampler.view_noise must be non-negative");
  as_config_error("sampler", [&] { sampler.train.validate(); });
  for (double lambda : sampler.lambda_sweep) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("sampler.lambda_sweep entries must lie in [0, 1]");
  }
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  Section root(doc, "config");
  root.read("seed", c.seed);
  root.read("workers", c.workers);

  if (const auto* g = root.child("generator")) {
    Section s(*g, "generator");
    s.read("T", c.generator.frames);
    s.read("D", c.generator.dim);
    s.read("C", c.generator.classes);
    s.read("smoothness", c.generator.smoothness);
    s.read("salient_fraction", c.generator.salient_fraction);
    s.read("noise_scale", c.generator.noise_scale);
    s.read("signal_gain", c.generator.signal_gain);
    s.finish();
  }

  if (const auto* g = root.child("classifier")) {
    Section s(*g, "classifier");
    std::string kind = to_string(c.classifier.kind);
    s.read("kind", kind);
    c.classifier.kind = as_config_error("classifier.kind", [&] { return classifier_kind_from_string(kind); });
    s.read("interaction_strength", c.classifier.interaction_strength);
    s.read("temperature", c.classifier.temperature);
    s.read_optional("kernel_bandwidth", c.classifier.kernel_bandwidth);
    s.finish();
  }
  if (c.classifier.kind == ClassifierKind::Additive) c.classifier.interaction_strength = 0.0;

  if (const auto* g = root.child("policy_grid")) {
    Section s(*g, "policy_grid");
    std::string preset;
    s.read("preset", preset);
    const json* cells = s.child("cells");
    if (!preset.empty() && cells) throw ConfigError("policy_grid: give either preset or cells, not both");
    if (!preset.empty()) {
      if (preset != "paper") throw ConfigError("policy_grid.preset: unknown preset '" + preset + "'");
      c.policy_grid.cells = paper_grid_preset();
    } else if (cells) {
      if (!cells->is_array()) throw ConfigError("policy_grid.cells must be an array");
      c.policy_grid.cells.clear();
      for (const auto& item : *cells) {
        Section cell(item, "policy_grid.cells[]");
        GridCell gc;
        cell.read("N", gc.n);
        cell.read("T", gc.frames);
        cell.finish();
        c.policy_grid.cells.push_back(gc);
      }
    }
    s.read("videos", c.policy_grid.videos);
    std::vector<std::string> names;
    for (auto kind : c.policy_grid.policies) names.push_back(policy_name(kind));
    s.read("policies", names);
    c.policy_grid.policies.clear();
    for (const auto& name : names) {
      c.policy_grid.policies.push_back(
          as_config_error("policy_grid.policies", [&] { return policy_kind_from_string(name); }));
    }
    s.read("budget", c.policy_grid.budget);
    s.read("fidelity", c.policy_grid.fidelity);
    s.finish();
  }

  if (const auto* g = root.child("redundancy")) {
    Section s(*g, "redundancy");
    s.read("rhos", c.redundancy.rhos);
    s.read("videos_per_cell", c.redundancy.videos_per_cell);
    s.finish();
  }

  if (const auto* g = root.child("sampler")) {
    Section s(*g, "sampler");
    auto& sm = c.sampler;
    auto& tr = sm.train;
    s.read("train_videos", sm.train_videos);
    s.read("heldout_videos", sm.heldout_videos);
    s.read("N", sm.n);
    s.read("hidden_dim", sm.hidden_dim);
    s.read("view_noise", sm.view_noise);
    s.read("learning_rate", tr.learning_rate);
    s.read("momentum", tr.momentum);
    s.read("weight_decay", tr.weight_decay);
    s.read("lambda", tr.loss.lambda);
    s.read("gamma", tr.loss.gamma);
    s.read("epochs", tr.epochs);
    s.read("batch_size", tr.batch_size);
    std::string mode = to_string(tr.loss.mode);
    s.read("aggregation", mode);
    tr.loss.mode = as_config_error("sampler.aggregation", [&] { return aggregation_mode_from_string(mode); });
    std::string objective = to_string(tr.loss.objective);
    s.read("objective", objective);
    tr.loss.objective =
        as_config_error("sampler.objective", [&] { return importance_objective_from_string(objective); });
    std::string form = tr.loss.ranking_form == RankingForm::Intended ? "intended" : "as-printed";
    s.read("ranking_form", form);
    if (form == "intended") {
      tr.loss.ranking_form = RankingForm::Intended;
    } else if (form == "as-printed") {
      tr.loss.ranking_form = RankingForm::AsPrinted;
    } else {
      throw ConfigError("sampler.ranking_form must be intended or as-printed");
    }
    s.read("ablation", sm.ablation);
    s.read("lambda_sweep", sm.lambda_sweep);
    s.finish();
  }
  root.finish();

  c.sampler.train.sample_count = c.sampler.n;
  c.sampler.train.workers = c.workers;
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json cells = json::array();
  for (const auto& cell : c.policy_grid.cells) cells.push_back({{"N", cell.n}, {"T", cell.frames}});
  json policies = json::array();
  for (auto kind : c.policy_grid.policies) policies.push_back(policy_name(kind));
  const auto& tr = c.sampler.train;
  return json{
      {"seed", c.seed},
      {"workers", c.workers},
      {"generator",
       {{"T", c.generator.frames},
        {"D", c.generator.dim},
        {"C", c.generator.classes},
        {"smoothness", c.generator.smoothness},
        {"salient_fraction", c.generator.salient_fraction},
        {"noise_scale", c.generator.noise_scale},
        {"signal_gain", c.generator.signal_gain}}},
      {"classifier",
       {{"kind", to_string(c.classifier.kind)},
        {"interaction_strength", c.classifier.interaction_strength},
        {"temperature", c.classifier.temperature},
        {"kernel_bandwidth", c.classifier.kernel_bandwidth
                                 ? json(*c.classifier.kernel_bandwidth)
                                 : json(std::sqrt(static_cast<double>(c.generator.dim)))}}},
      {"policy_grid",
       {{"cells", cells},
        {"videos", c.policy_grid.videos},
        {"policies", policies},
        {"budget", c.policy_grid.budget},
        {"fidelity", c.policy_grid.fidelity}}},
      {"redundancy", {{"rhos", c.redundancy.rhos}, {"videos_per_cell", c.redundancy.videos_per_cell}}},
      {"sampler",
       {{"train_videos", c.sampler.train_videos},
        {"heldout_videos", c.sampler.heldout_videos},
        {"N", c.sampler.n},
        {"hidden_dim", c.sampler.hidden_dim},
        {"view_noise", c.sampler.view_noise},
        {"learning_rate", tr.learning_rate},
        {"momentum", tr.momentum},
        {"weight_decay", tr.weight_decay},
        {"lambda", tr.loss.lambda},
        {"gamma", tr.loss.gamma},
        {"epochs", tr.epochs},
        {"batch_size", tr.batch_size},
        {"aggregation", to_string(tr.loss.mode)},
        {"objective", to_string(tr.loss.objective)},
        {"ranking_form", tr.loss.ranking_form == RankingForm::Intended ? "intended" : "as-printed"},
        {"ablation", c.sampler.ablation},
        {"lambda_sweep", c.sampler.lambda_sweep}}},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = read_json_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(doc);
}

Matrix experiment_prototypes(const ExperimentConfig& config) {
  return make_prototypes(config.generator.classes, config.generator.dim,
                         derive_seed(config.seed, {stream::kCorpus}));
}

Classifier make_classifier(const ExperimentConfig& config, const Matrix& prototypes) {
  const auto& s = config.classifier;
  if (s.kind == ClassifierKind::Additive) return Classifier::additive(prototypes, s.temperature);
  const double sigma = s.kernel_bandwidth.value_or(std::sqrt(static_cast<double>(prototypes.cols())));
  return Classifier(ClassifierKind::RedundancyPenalized, prototypes, s.temperature, s.interaction_strength,
                    KernelConfig::isotropic(sigma));
}

PolicyGridReport run_policy_grid(const ExperimentConfig& config, const std::filesystem::path& out) {
  config.validate();
  const auto prototypes = experiment_prototypes(config);
  const auto classifier = make_classifier(config, prototypes);

  PolicyGridReport report;
  json cells = json::array();
  for (const auto& cell : config.policy_grid.cells) {
    GridCellReport cell_report;
    cell_report.cell = cell;
    cell_report.corpus_seed = derive_seed(config.seed, {stream::kCorpus, cell.n, cell.frames});
    GeneratorConfig gen = config.generator;
    gen.frames = cell.frames;
    const auto corpus = generate_corpus(gen, prototypes, config.policy_grid.videos, cell_report.corpus_seed);

    EvaluationOptions options;
    options.budget = config.policy_grid.budget;
    options.fidelity = config.policy_grid.fidelity;
    options.workers = config.workers;
    options.random_seed = derive_seed(config.seed, {stream::kRandomPolicy, cell.n, cell.frames});
    cell_report.evaluation = evaluate_policies(classifier, corpus, cell.n, config.policy_grid.policies, options);
    const auto& eval = cell_report.evaluation;

    std::ostringstream csv;
    csv << "policy_name,video_seed,N,T,selected,clip_confidence,classifier_calls" << kCrlf;
    for (const auto& rec : eval.records) {
      csv << csv_field(rec.result.policy_name) << ',' << rec.video_seed << ',' << cell.n << ',' << cell.frames
          << ',' << csv_field(join_indices(rec.result.selected)) << ','
          << csv_number(rec.result.clip_confidence) << ',' << rec.result.classifier_calls << kCrlf;
    }
    if (!out.empty()) write_text_file(out / cell_file_name(cell), csv.str());

    json policies = json::object();
    for (auto kind : config.policy_grid.policies) {
      const auto name = policy_name(kind);
      auto it = eval.summary.find(name);
      if (it == eval.summary.end()) {
        policies[name] = {{"status", eval.optimal_skipped.value_or("skipped")}};
        continue;
      }
      json entry{{"status", "ok"},
                 {"mean_confidence", it->second.mean_confidence},
                 {"mean_calls", it->second.mean_calls}};
      if (it->second.mean_fidelity) entry["mean_fidelity"] = *it->second.mean_fidelity;
      policies[name] = entry;
    }
    json cell_json{{"N", cell.n},
                   {"T", cell.frames},
                   {"videos", corpus.size()},
                   {"corpus_seed", cell_report.corpus_seed},
                   {"random_policy_seed", options.random_seed},
                   {"subsets", binomial_json(cell.frames, cell.n)},
                   {"csv", cell_file_name(cell)},
                   {"policies", policies}};
    if (eval.optimal_skipped) cell_json["optimal_status"] = *eval.optimal_skipped;
    cells.push_back(cell_json);
    report.cells.push_back(std::move(cell_report));
  }
  report.summary = json{{"config", config_to_json(config)}, {"cells", cells}};
  if (!out.empty()) write_json_file(out / "policy_grid.json", report.summary);
  return report;
}

RedundancyReport run_redundancy_study(const ExperimentConfig& config, const std::filesystem::path& out) {
  config.validate();
  if (config.redundancy.rhos.empty()) throw ConfigError("redundancy.rhos must not be empty");
  RedundancySweepConfig sweep_config;
  sweep_config.generator = config.generator;
  sweep_config.rhos = config.redundancy.rhos;
  sweep_config.videos_per_cell = config.redundancy.videos_per_cell;
  sweep_config.seed = config.seed;
  sweep_config.workers = config.workers;
  as_config_error("redundancy", [&] { sweep_config.validate(); });

  RedundancyReport report;
  report.sweep = redundancy_sweep(sweep_config);
  const auto& sweep = report.sweep;

  json cells = json::array();
  std::ostringstream csv;
  csv << "rho,video,t,relevance" << kCrlf;
  const std::size_t per_video = config.generator.frames - 1;
  for (const auto& cell : sweep.cells) {
    cells.push_back({{"rho", cell.rho},
                     {"mean", cell.mean},
                     {"p10", cell.p10},
                     {"p50", cell.p50},
                     {"p90", cell.p90},
                     {"pairs", cell.relevances.size()},
                     {"histogram", cell.histogram}});
    for (std::size_t i = 0; i < cell.relevances.size(); ++i) {
      csv << csv_number(cell.rho) << ',' << i / per_video << ',' << i % per_video << ','
          << csv_number(cell.relevances[i]) << kCrlf;
    }
  }
  report.summary = json{{"config", config_to_json(config)},
                        {"bandwidth", std::get<double>(sweep.bandwidth.config.bandwidth)},
                        {"median_distance", sweep.bandwidth.median_distance},
                        {"bandwidth_fallback", sweep.bandwidth.degenerate},
                        {"normalizer", sweep.normalizer},
                        {"half_relevance_rho", sweep.half_relevance_rho ? json(*sweep.half_relevance_rho) : json()},
                        {"cells", cells}};
  if (!out.empty()) {
    write_json_file(out / "redundancy.json", report.summary);
    write_text_file(out / "redundancy_pairs.csv", csv.str());
  }
  return report;
}

namespace {

struct HeldoutData {
  std::vector<SyntheticVideo> videos;
  std::vector<FrameIndexSet> semi_optimal;  // configured aggregation mode
};

SamplerModel initial_model(const ExperimentConfig& config) {
  SamplerShape shape;
  shape.feature_dim = config.generator.dim;
  shape.hidden_dim = config.sampler.hidden_dim;
  shape.classes = config.generator.classes;
  shape.view_noise = config.sampler.view_noise;
  shape.seed = derive_seed(config.seed, {stream::kModelInit});
  return SamplerModel::initialize(shape);
}

TrainConfig train_config(const ExperimentConfig& config) {
  TrainConfig tc = config.sampler.train;
  tc.sample_count = config.sampler.n;
  tc.workers = config.workers;
  tc.seed = derive_seed(config.seed, {stream::kShuffle});
  return tc;
}

AblationRow train_variant(const ExperimentConfig& config, const LossConfig& loss, bool label_guidance,
                          const std::vector<SyntheticVideo>& train_set, const HeldoutData& heldout,
                          const Classifier& classifier) {
  TrainConfig tc = train_config(config);
  tc.loss = loss;
  const auto trained = train(initial_model(config), train_set, {}, classifier, tc);
  AblationRow row;
  row.objective = loss.objective;
  row.mode = loss.mode;
  row.label_guidance = label_guidance;
  row.lambda = loss.lambda;
  row.final_train_loss = trained.log.empty() ? 0.0 : trained.log.back().train_loss;
  for (std::size_t k = 0; k < heldout.videos.size(); ++k) {
    const auto result = infer(trained.model, heldout.videos[k], config.sampler.n, classifier);
    row.heldout_confidence += result.clip_confidence;
    row.heldout_fidelity += sampling_fidelity(result.selected, heldout.semi_optimal[k]);
  }
  const auto count = static_cast<double>(heldout.videos.size());
  row.heldout_confidence /= count;
  row.heldout_fidelity /= count;
  return row;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream csv;
  csv << "objective,aggregation,label_guidance,lambda,heldout_confidence,heldout_fidelity,final_train_loss"
      << kCrlf;
  for (const auto& r : rows) {
    csv << to_string(r.objective) << ',' << to_string(r.mode) << ',' << (r.label_guidance ? "true" : "false")
        << ',' << csv_number(r.lambda) << ',' << csv_number(r.heldout_confidence) << ','
        << csv_number(r.heldout_fidelity) << ',' << csv_number(r.final_train_loss) << kCrlf;
  }
  return csv.str();
}

json ablation_json(const std::vector<AblationRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"objective", to_string(r.objective)},
                   {"aggregation", to_string(r.mode)},
                   {"label_guidance", r.label_guidance},
                   {"lambda", r.lambda},
                   {"heldout_confidence", r.heldout_confidence},
                   {"heldout_fidelity", r.heldout_fidelity},
                   {"final_train_loss", r.final_train_loss}});
  }
  return out;
}

}  // namespace

SamplerReport run_sampler_experiment(const ExperimentConfig& config, const std::filesystem::path& out) {
  config.validate();
  if (config.sampler.heldout_videos < 1) throw ConfigError("sampler.heldout_videos must be at least 1");
  const auto prototypes = experiment_prototypes(config);
  const auto classifier = make_classifier(config, prototypes);
  const std::size_t n = config.sampler.n;
  const std::uint64_t train_seed = derive_seed(config.seed, {stream::kCorpus, 100});
  const std::uint64_t heldout_seed = derive_seed(config.seed, {stream::kCorpus, 101});
  const auto train_set = generate_corpus(config.generator, prototypes, config.sampler.train_videos, train_seed);

  HeldoutData heldout;
  heldout.videos = generate_corpus(config.generator, prototypes, config.sampler.heldout_videos, heldout_seed);
  const auto mode = config.sampler.train.loss.mode;
  for (const auto& video : heldout.videos) {
    const auto confidences = classifier.classify_frames(video);
    heldout.semi_optimal.push_back(top_n_indices(aggregate_rows(confidences, video.label, mode), n));
  }

  SamplerReport report;
  const TrainConfig tc = train_config(config);
  const auto model = initial_model(config);
  report.training = train(model, train_set, heldout.videos, classifier, tc);

  // Held-out comparison against the reference policies.
  std::vector<PolicyKind> kinds = {PolicyKind::Uniform, PolicyKind::Random, PolicyKind::SemiOptimal,
                                   PolicyKind::SemiOptimalMax, PolicyKind::Optimal};
  EvaluationOptions options;
  options.budget = config.policy_grid.budget;
  options.workers = config.workers;
  options.random_seed = derive_seed(config.seed, {stream::kRandomPolicy, 101});
  const auto eval = evaluate_policies(classifier, heldout.videos, n, kinds, options);
  for (auto kind : kinds) {
    const auto name = policy_name(kind);
    auto it = eval.summary.find(name);
    if (it == eval.summary.end()) continue;
    ComparisonRow row;
    row.policy = name;
    row.mean_confidence = it->second.mean_confidence;
    row.fidelity_to_optimal = it->second.mean_fidelity;
    row.mean_calls = it->second.mean_calls;
    double fid = 0.0;
    std::size_t count = 0;
    for (const auto& rec : eval.records) {
      if (rec.result.policy_name != name) continue;
      fid += sampling_fidelity(rec.result.selected, heldout.semi_optimal[rec.video_index]);
      ++count;
    }
    row.fidelity_to_semi_optimal = fid / static_cast<double>(count);
    report.comparison.push_back(row);
  }
  {
    // Optimal sets, when available, for the sampler's fidelity-to-optimal column.
    std::vector<std::optional<FrameIndexSet>> optimal_sets(heldout.videos.size());
    for (const auto& rec : eval.records) {
      if (rec.result.policy_name == policy_name(PolicyKind::Optimal)) optimal_sets[rec.video_index] = rec.result.selected;
    }
    ComparisonRow row;
    row.policy = "sampler";
    double fid_opt = 0.0;
    bool have_optimal = true;
    for (std::size_t k = 0; k < heldout.videos.size(); ++k) {
      const auto result = infer(report.training.model, heldout.videos[k], n, classifier);
      row.mean_confidence += result.clip_confidence;
      row.mean_calls += static_cast<double>(result.classifier_calls);
      row.fidelity_to_semi_optimal += sampling_fidelity(result.selected, heldout.semi_optimal[k]);
      if (optimal_sets[k]) {
        fid_opt += sampling_fidelity(result.selected, *optimal_sets[k]);
      } else {
        have_optimal = false;
      }
    }
    const auto count = static_cast<double>(heldout.videos.size());
    row.mean_confidence /= count;
    row.mean_calls /= count;
    row.fidelity_to_semi_optimal /= count;
    if (have_optimal) row.fidelity_to_optimal = fid_opt / count;
    report.comparison.push_back(row);
  }

  if (config.sampler.ablation) {
    for (auto objective : {ImportanceObjective::SquaredError, ImportanceObjective::Ranking}) {
      for (auto agg : {AggregationMode::TrueLabel, AggregationMode::MaxOverClasses}) {
        for (bool guidance : {false, true}) {
          LossConfig loss = config.sampler.train.loss;
          loss.objective = objective;
          loss.mode = agg;
          loss.lambda = guidance ? config.sampler.train.loss.lambda : 1.0;
          report.ablation.push_back(train_variant(config, loss, guidance, train_set, heldout, classifier));
        }
      }
    }
  }
  for (double lambda : config.sampler.lambda_sweep) {
    LossConfig loss = config.sampler.train.loss;
    loss.lambda = lambda;
    report.lambda_sweep.push_back(train_variant(config, loss, lambda < 1.0, train_set, heldout, classifier));
  }

  // Reports.
  std::ostringstream log_csv;
  log_csv << "epoch,lr,train_loss,heldout_fidelity,heldout_confidence" << kCrlf;
  for (const auto& e : report.training.log) {
    log_csv << e.epoch << ',' << csv_number(e.learning_rate) << ',' << csv_number(e.train_loss) << ','
            << csv_number(e.heldout_fidelity) << ',' << csv_number(e.heldout_confidence) << kCrlf;
  }
  std::ostringstream cmp_csv;
  cmp_csv << "policy,mean_confidence,fidelity_to_optimal,fidelity_to_semi_optimal,mean_calls" << kCrlf;
  json comparison = json::object();
  for (const auto& row : report.comparison) {
    cmp_csv << csv_field(row.policy) << ',' << csv_number(row.mean_confidence) << ','
            << (row.fidelity_to_optimal ? csv_number(*row.fidelity_to_optimal) : std::string()) << ','
            << csv_number(row.fidelity_to_semi_optimal) << ',' << csv_number(row.mean_calls) << kCrlf;
    json entry{{"mean_confidence", row.mean_confidence},
               {"fidelity_to_semi_optimal", row.fidelity_to_semi_optimal},
               {"mean_calls", row.mean_calls}};
    if (row.fidelity_to_optimal) entry["fidelity_to_optimal"] = *row.fidelity_to_optimal;
    comparison[row.policy] = entry;
  }
  json summary{{"config", config_to_json(config)},
               {"seeds",
                {{"train_corpus", train_seed},
                 {"heldout_corpus", heldout_seed},
                 {"model_init", model.seed},
                 {"shuffle", tc.seed},
                 {"random_policy", options.random_seed}}},
               {"comparison", comparison},
               {"epochs", report.training.log.size()}};
  if (!report.training.log.empty()) {
    const auto& last = report.training.log.back();
    summary["final_epoch"] = {{"train_loss", last.train_loss},
                              {"heldout_fidelity", last.heldout_fidelity},
                              {"heldout_confidence", last.heldout_confidence}};
  }
  if (eval.optimal_skipped) summary["optimal_status"] = *eval.optimal_skipped;
  if (!report.ablation.empty()) summary["ablation"] = ablation_json(report.ablation);
  if (!report.lambda_sweep.empty()) summary["lambda_sweep"] = ablation_json(report.lambda_sweep);
  report.summary = summary;

  if (!out.empty()) {
    write_text_file(out / "training_log.csv", log_csv.str());
    write_text_file(out / "comparison.csv", cmp_csv.str());
    json checkpoint = model_to_json(report.training.model);
    write_json_file(out / "checkpoint.json", checkpoint);
    write_json_file(out / "sampler.json", summary);
    if (!report.ablation.empty()) write_text_file(out / "ablation.csv", ablation_csv(report.ablation));
    if (!report.lambda_sweep.empty()) write_text_file(out / "lambda_sweep.csv", ablation_csv(report.lambda_sweep));
  }
  return report;
}

}  // namespace framelab::bench
