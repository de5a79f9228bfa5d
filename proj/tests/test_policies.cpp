#include <doctest.h>

#include <cmath>
#include <vector>

#include "framelab/policies.hpp"
#include "framelab/rng.hpp"

using namespace framelab;

namespace {

std::vector<std::size_t> indices_of(const FrameIndexSet& s) { return {s.begin(), s.end()}; }

Matrix identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

// Video whose frame t has true-class (class 0) logit logits[t] and 0 elsewhere.
SyntheticVideo logit_video(const std::vector<double>& logits, std::size_t classes) {
  SyntheticVideo v;
  v.frames = Matrix(logits.size(), classes);
  for (std::size_t t = 0; t < logits.size(); ++t) v.frames(t, 0) = logits[t];
  v.label = 0;
  v.classes = classes;
  v.salient_mask.assign(logits.size(), true);
  return v;
}

struct Best {
  double confidence = -1.0;
  unsigned mask = 0;
};

// Exhaustive search over bitmasks of size n.
Best brute_force(const Classifier& c, const SyntheticVideo& v, std::size_t n) {
  const std::size_t T = v.frame_count();
  Best best;
  for (unsigned mask = 0; mask < (1u << T); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < T; ++t) {
      if (mask & (1u << t)) idx.push_back(t);
    }
    const double conf = c.classify_clip(v, FrameIndexSet(idx, T))[v.label];
    if (conf > best.confidence) best = {conf, mask};
  }
  return best;
}

}  // namespace

TEST_CASE("uniform policy stencil") {
  CHECK(indices_of(uniform_policy(10, 5)) == std::vector<std::size_t>{1, 3, 5, 7, 9});
  CHECK(indices_of(uniform_policy(6, 6)) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(indices_of(uniform_policy(4, 1)) == std::vector<std::size_t>{2});
  CHECK(indices_of(uniform_policy(10, 6)) == std::vector<std::size_t>{0, 1, 3, 5, 6, 8});
  for (std::size_t T = 1; T <= 40; ++T) {
    for (std::size_t n = 1; n <= T; ++n) CHECK(uniform_policy(T, n).size() == n);
  }
  CHECK_THROWS_AS(uniform_policy(3, 4), std::invalid_argument);
}

TEST_CASE("random policy") {
  CHECK(random_policy(8, 8, 123) == FrameIndexSet::all(8));
  CHECK(random_policy(10, 4, 9) == random_policy(10, 4, 9));
  CHECK_THROWS_AS(random_policy(3, 4, 1), std::invalid_argument);

  const FrameIndexSet target({0, 4, 8}, 10);
  double fid = 0.0;
  for (std::uint64_t k = 0; k < 10000; ++k) fid += sampling_fidelity(random_policy(10, 3, derive_seed(42, {k})), target);
  CHECK(std::abs(fid / 10000.0 - 0.30) <= 0.02);
}

TEST_CASE("sampling fidelity") {
  CHECK(sampling_fidelity(FrameIndexSet({1, 2}, 5), FrameIndexSet({2, 3}, 5)) == 0.5);
  CHECK(sampling_fidelity(FrameIndexSet({1, 2}, 5), FrameIndexSet({1, 2}, 5)) == 1.0);
  CHECK(sampling_fidelity(FrameIndexSet({0, 1}, 5), FrameIndexSet({3, 4}, 5)) == 0.0);
  CHECK_THROWS_AS(sampling_fidelity(FrameIndexSet({0}, 5), FrameIndexSet({3, 4}, 5)), std::invalid_argument);
}

TEST_CASE("optimal policy example") {
  const auto c = Classifier::additive(identity(2));
  const auto v = logit_video({0.1, 0.9, 0.5, 0.7}, 2);
  const auto best = brute_force(c, v, 2);
  CHECK(best.mask == 0b1010u);
  const auto r = optimal_policy(c, v, 2);
  CHECK(indices_of(r.selected) == std::vector<std::size_t>{1, 3});
  CHECK(r.clip_confidence == best.confidence);
  CHECK(r.classifier_calls == 6);

  const auto all = optimal_policy(c, v, 4);
  CHECK(all.selected == FrameIndexSet::all(4));

  CHECK_THROWS_AS(optimal_policy(c, v, 5), std::invalid_argument);
  CHECK_THROWS_AS(optimal_policy(c, v, 2, 5), CapacityError);
}

TEST_CASE("optimal policy matches brute force and breaks ties lexicographically") {
  GeneratorConfig g;
  g.dim = 8;
  g.classes = 3;
  g.smoothness = 0.9;
  const auto protos = make_prototypes(g.classes, g.dim, 3);
  const auto pen = Classifier::redundancy_penalized(protos, 0.5);
  for (const auto& v : generate_corpus(g, protos, 20, 4)) {
    for (std::size_t n : {2u, 3u, 5u}) {
      const auto best = brute_force(pen, v, n);
      CHECK(optimal_policy(pen, v, n).clip_confidence == best.confidence);
    }
  }

  // Every frame identical: all subsets tie, the first in lexicographic order wins.
  const auto c = Classifier::additive(identity(2));
  const auto flat = logit_video({0.3, 0.3, 0.3, 0.3, 0.3}, 2);
  CHECK(indices_of(optimal_policy(c, flat, 3).selected) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("semi-optimal policy") {
  const auto c = Classifier::additive(identity(2));
  // Confidences sigma(l) are increasing in l, so the order follows the logits.
  const auto v = logit_video({std::log(0.2 / 0.8), std::log(0.8 / 0.2), 0.0, std::log(0.6 / 0.4)}, 2);
  const auto r = semi_optimal_policy(c, v, 2);
  CHECK(indices_of(r.selected) == std::vector<std::size_t>{1, 3});
  CHECK(r.classifier_calls == 4);
  CHECK(r.evaluation_calls == 1);

  c.reset_calls();
  (void)semi_optimal_policy(c, v, 2);
  CHECK(c.calls() == 5);
  c.reset_calls();
  (void)optimal_policy(c, v, 2);
  CHECK(c.calls() == 6);
}

TEST_CASE("policy invariants on generated videos") {
  GeneratorConfig g;
  const auto protos = make_prototypes(g.classes, g.dim, 1);
  const auto corpus = generate_corpus(g, protos, 40, 8);
  const auto add = Classifier::additive(protos);
  const auto pen = Classifier::redundancy_penalized(protos, 0.5);
  for (const auto& v : corpus) {
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto so = semi_optimal_policy(add, v, n);
      const auto o = optimal_policy(add, v, n);
      CHECK(std::abs(so.clip_confidence - o.clip_confidence) <= 1e-12);
    }
    for (const Classifier* c : {&add, &pen}) {
      const auto o = optimal_policy(*c, v, 1);
      CHECK(sampling_fidelity(semi_optimal_policy(*c, v, 1).selected, o.selected) == 1.0);

      const auto o6 = optimal_policy(*c, v, 6);
      CHECK(o6.classifier_calls == 210);
      for (const auto& other : {semi_optimal_policy(*c, v, 6), semi_optimal_policy(*c, v, 6, AggregationMode::MaxOverClasses),
                                evaluate_selection(*c, v, uniform_policy(10, 6), "uniform"),
                                evaluate_selection(*c, v, random_policy(10, 6, v.seed), "random")}) {
        CHECK(o6.clip_confidence >= other.clip_confidence);
        CHECK(other.clip_confidence == c->classify_clip(v, other.selected)[v.label]);
      }
    }
  }
}

TEST_CASE("evaluate_policies") {
  GeneratorConfig g;
  const auto protos = make_prototypes(g.classes, g.dim, 1);
  const auto pen = Classifier::redundancy_penalized(protos, 0.5);
  const auto one = generate_corpus(g, protos, 1, 3);
  const auto single = evaluate_policies(pen, one, 6, {PolicyKind::Uniform});
  CHECK(single.summary.size() == 1);
  CHECK(single.summary.at("uniform").mean_confidence ==
        pen.classify_clip(one[0], uniform_policy(10, 6))[one[0].label]);

  const auto corpus = generate_corpus(g, protos, 30, 4);
  const std::vector<PolicyKind> kinds{PolicyKind::Uniform, PolicyKind::Random, PolicyKind::Optimal,
                                      PolicyKind::SemiOptimal, PolicyKind::All};
  EvaluationOptions opts;
  opts.random_seed = 5;
  const auto a = evaluate_policies(pen, corpus, 6, kinds, opts);
  opts.workers = 3;
  const auto b = evaluate_policies(pen, corpus, 6, kinds, opts);
  CHECK(a.records.size() == 150);
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].result.selected == b.records[k].result.selected);
    CHECK(a.records[k].result.clip_confidence == b.records[k].result.clip_confidence);
  }
  CHECK(a.summary.at("optimal").mean_calls == 210.0);
  CHECK(a.summary.at("semi-optimal").mean_calls == 10.0);
  CHECK(a.summary.at("uniform").mean_calls == 1.0);
  CHECK(a.summary.at("optimal").mean_fidelity.value() == 1.0);
  CHECK(a.summary.at("optimal").mean_confidence >= a.summary.at("semi-optimal").mean_confidence);
  CHECK(a.summary.at("semi-optimal").mean_confidence >= a.summary.at("uniform").mean_confidence);

  EvaluationOptions tight;
  tight.budget = 100;
  const auto skipped = evaluate_policies(pen, corpus, 6, {PolicyKind::Optimal, PolicyKind::SemiOptimal}, tight);
  CHECK(skipped.optimal_skipped.has_value());
  CHECK(skipped.summary.count("optimal") == 0);
  CHECK_FALSE(skipped.summary.at("semi-optimal").mean_fidelity.has_value());
  CHECK(skipped.summary.at("semi-optimal").mean_calls == 10.0);

  CHECK_THROWS_AS(evaluate_policies(pen, corpus, 11, {PolicyKind::Uniform}), std::invalid_argument);
}

TEST_CASE("aggregation modes") {
  const std::vector<double> q{0.1, 0.7, 0.2};
  CHECK(aggregate_confidence(q, 0, AggregationMode::TrueLabel) == 0.1);
  CHECK(aggregate_confidence(q, 0, AggregationMode::MaxOverClasses) == 0.7);
  CHECK(aggregation_mode_from_string(to_string(AggregationMode::MaxOverClasses)) == AggregationMode::MaxOverClasses);
  CHECK_THROWS_AS(aggregation_mode_from_string("mean"), std::invalid_argument);
  for (auto k : {PolicyKind::Uniform, PolicyKind::Random, PolicyKind::Optimal, PolicyKind::SemiOptimal,
                 PolicyKind::SemiOptimalMax, PolicyKind::All}) {
    CHECK(policy_kind_from_string(policy_name(k)) == k);
  }
}
