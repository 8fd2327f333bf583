#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "estkit/errors.hpp"
#include "estkit/eval.hpp"
#include "estkit/rng.hpp"
#include "oracles.hpp"

using namespace estkit;

namespace {

std::vector<FeatureRecord> synthetic_records(std::size_t n, std::size_t dim, double shift,
                                             std::uint64_t seed, std::size_t identities = 0) {
  Rng rng(seed);
  std::vector<FeatureRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRecord r;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%04zu", i);
    r.clip_id = buf;
    r.label = i % 2 == 0 ? ClassLabel::deceptive : ClassLabel::truthful;
    r.identity = identities == 0 ? r.clip_id : "spk" + std::to_string(i % identities);
    r.features.resize(dim);
    for (auto& v : r.features) {
      v = rng.uniform(-1, 1) + (r.label == ClassLabel::deceptive ? shift : 0.0);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

TEST_CASE("roc_auc fixtures") {
  CHECK(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0, 1}) == 0.5);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}),
                  SingleClassTest);
}

TEST_CASE("roc_auc equals the pairwise oracle, with ties") {
  Rng rng(101);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.below(8) / 7.0;  // coarse grid: many ties
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 0;
    labels[1] = 1;
    CHECK(std::abs(roc_auc(scores, labels) - oracles::pairwise_auc(scores, labels)) < 1e-12);
  }
}

TEST_CASE("roc_auc is invariant under strictly increasing transforms") {
  Rng rng(103);
  std::vector<double> scores(40);
  std::vector<int> labels(40);
  for (std::size_t i = 0; i < 40; ++i) {
    scores[i] = rng.uniform(-2, 2);
    labels[i] = static_cast<int>(rng.below(2));
  }
  labels[0] = 0;
  labels[1] = 1;
  const double base = roc_auc(scores, labels);
  std::vector<double> transformed(40);
  for (std::size_t i = 0; i < 40; ++i) transformed[i] = std::exp(3.0 * scores[i]) + 7.0;
  CHECK(roc_auc(transformed, labels) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("make_folds sizes: 188 clips in 10 folds splits 19x8 + 18x2") {
  std::vector<int> labels(188);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
  std::vector<std::string> identities(188, "");
  const auto plan = make_folds(labels, identities, 10, 7, FoldStrategy::shuffled);
  std::map<int, int> sizes;
  for (int f : plan.assignments) sizes[f] += 1;
  REQUIRE(sizes.size() == 10);
  int nineteen = 0, eighteen = 0;
  for (const auto& [fold, size] : sizes) {
    if (size == 19) ++nineteen;
    if (size == 18) ++eighteen;
  }
  CHECK(nineteen == 8);
  CHECK(eighteen == 2);
}

TEST_CASE("make_folds leave-one-out gives singleton folds") {
  std::vector<int> labels{0, 1, 0, 1, 0, 1};
  std::vector<std::string> identities(6, "");
  const auto plan = make_folds(labels, identities, 6, 1, FoldStrategy::shuffled);
  std::set<int> seen(plan.assignments.begin(), plan.assignments.end());
  CHECK(seen.size() == 6);
}

TEST_CASE("make_folds is deterministic in the seed") {
  std::vector<int> labels(57);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
  std::vector<std::string> identities(57, "");
  for (FoldStrategy strategy : {FoldStrategy::shuffled, FoldStrategy::stratified}) {
    const auto a = make_folds(labels, identities, 10, 42, strategy);
    const auto b = make_folds(labels, identities, 10, 42, strategy);
    const auto c = make_folds(labels, identities, 10, 43, strategy);
    CHECK(a.assignments == b.assignments);
    CHECK(a.assignments != c.assignments);
  }
}

TEST_CASE("stratified folds keep class counts within one of the fold-size share") {
  Rng rng(107);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 10 + rng.below(200);
    const int k = static_cast<int>(2 + rng.below(std::min<std::uint64_t>(n, 12) - 1));
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(rng.below(2));
    std::vector<std::string> identities(n, "");
    const auto plan = make_folds(labels, identities, k, rng.next(), FoldStrategy::stratified);

    std::vector<std::array<int, 2>> counts(static_cast<std::size_t>(k), {0, 0});
    std::size_t total_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      counts[static_cast<std::size_t>(plan.assignments[i])]
            [static_cast<std::size_t>(labels[i])] += 1;
      total_pos += static_cast<std::size_t>(labels[i]);
    }
    for (const auto& fold : counts) {
      const double fold_size = fold[0] + fold[1];
      const double expected_pos =
          fold_size * static_cast<double>(total_pos) / static_cast<double>(n);
      CHECK(std::abs(fold[1] - expected_pos) <= 1.0 + 1e-9);
      CHECK(std::abs(fold[0] - (fold_size - expected_pos)) <= 1.0 + 1e-9);
    }
    // Fold sizes stay within one of each other.
    int min_size = INT32_MAX, max_size = 0;
    for (const auto& fold : counts) {
      min_size = std::min(min_size, fold[0] + fold[1]);
      max_size = std::max(max_size, fold[0] + fold[1]);
    }
    CHECK(max_size - min_size <= 1);
  }
}

TEST_CASE("identity_grouped folds never split an identity") {
  std::vector<int> labels;
  std::vector<std::string> identities;
  Rng rng(109);
  for (int speaker = 0; speaker < 20; ++speaker) {
    const std::size_t clips = 1 + rng.below(4);
    for (std::size_t c = 0; c < clips; ++c) {
      labels.push_back(static_cast<int>(rng.below(2)));
      identities.push_back("spk" + std::to_string(speaker));
    }
  }
  const auto plan = make_folds(labels, identities, 5, 3, FoldStrategy::identity_grouped);
  std::map<std::string, std::set<int>> folds_of;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    folds_of[identities[i]].insert(plan.assignments[i]);
  }
  for (const auto& [identity, folds] : folds_of) {
    CHECK(folds.size() == 1);
  }

  // An identity spanning 3 clips shares one fold by construction.
  CHECK_THROWS_AS(make_folds(labels, identities, 21, 3, FoldStrategy::identity_grouped),
                  TooFewSamples);
}

TEST_CASE("make_folds rejects K larger than the clip count") {
  std::vector<int> labels{0, 1, 0};
  std::vector<std::string> identities(3, "");
  CHECK_THROWS_AS(make_folds(labels, identities, 4, 0, FoldStrategy::shuffled), TooFewSamples);
}

TEST_CASE("cross_validate determinism and metric consistency") {
  const auto records = synthetic_records(40, 6, 1.0, 5);
  const auto plan = make_folds(records, 5, 11, FoldStrategy::stratified);
  LearnerSpec spec;
  spec.kind = LearnerKind::decision_tree;
  PipelineOptions options;
  options.select_k = 3;
  const auto a = cross_validate(spec, records, plan, options);
  const auto b = cross_validate(spec, records, plan, options);
  REQUIRE(a.size() == 5);
  for (std::size_t f = 0; f < a.size(); ++f) {
    CHECK(a[f].accuracy == b[f].accuracy);
    CHECK(a[f].auc == b[f].auc);
    CHECK(a[f].selection_hash == b[f].selection_hash);
    CHECK(a[f].confusion.total() ==
          std::count(plan.assignments.begin(), plan.assignments.end(), static_cast<int>(f)));
    const auto& c = a[f].confusion;
    CHECK(a[f].accuracy ==
          static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()));
  }
}

TEST_CASE("a leaked label feature drives per-fold accuracy to one") {
  auto records = synthetic_records(60, 8, 0.0, 17);
  for (auto& r : records) {
    r.features.push_back(r.label == ClassLabel::deceptive ? 1.0 : 0.0);
  }
  const auto plan = make_folds(records, 5, 23, FoldStrategy::stratified);
  PipelineOptions options;
  options.select_k = 1;  // per-fold selection must find the leaked column
  for (LearnerKind kind : {LearnerKind::linear_svm, LearnerKind::logistic_regression,
                           LearnerKind::decision_tree, LearnerKind::knn}) {
    LearnerSpec spec;
    spec.kind = kind;
    for (const auto& fold : cross_validate(spec, records, plan, options)) {
      CHECK(fold.accuracy == 1.0);
    }
  }
}

TEST_CASE("a constant-score model stays near chance on balanced folds") {
  // All-identical features make every learner output a constant score.
  auto records = synthetic_records(60, 4, 0.0, 19);
  for (auto& r : records) r.features.assign(4, 1.0);
  const auto plan = make_folds(records, 5, 29, FoldStrategy::stratified);
  LearnerSpec spec;
  spec.kind = LearnerKind::knn;
  const auto folds = cross_validate(spec, records, plan, PipelineOptions{});
  for (const auto& fold : folds) {
    CHECK(fold.accuracy >= 0.4);
    CHECK(fold.accuracy <= 0.6);
    CHECK(fold.auc == doctest::Approx(0.5));
  }
}

TEST_CASE("global selection fits one mask for all folds; per-fold masks vary") {
  const auto records = synthetic_records(50, 10, 0.7, 43);
  const auto plan = make_folds(records, 5, 13, FoldStrategy::stratified);
  LearnerSpec spec;
  spec.kind = LearnerKind::knn;

  PipelineOptions global;
  global.select_k = 4;
  global.select_global = true;
  const auto global_folds = cross_validate(spec, records, plan, global);
  for (const auto& fold : global_folds) {
    CHECK(fold.selection_hash == global_folds.front().selection_hash);
    CHECK(fold.selection_hash != 0);
  }

  PipelineOptions per_fold;
  per_fold.select_k = 4;
  const auto fold_masks = cross_validate(spec, records, plan, per_fold);
  std::set<std::uint64_t> distinct;
  for (const auto& fold : fold_masks) distinct.insert(fold.selection_hash);
  CHECK(distinct.size() > 1);
}

TEST_CASE("the pipeline runs with standardization disabled and with ANOVA ranking") {
  const auto records = synthetic_records(40, 6, 1.5, 47);
  const auto plan = make_folds(records, 4, 3, FoldStrategy::stratified);
  LearnerSpec spec;
  spec.kind = LearnerKind::knn;

  PipelineOptions options;
  options.standardize = false;
  options.select_k = 3;
  options.score_kind = ScoreKind::anova;
  const auto folds = cross_validate(spec, records, plan, options);
  REQUIRE(folds.size() == 4);
  // Strong class shift: even unstandardized kNN clears chance easily.
  double mean_auc = 0.0;
  for (const auto& fold : folds) mean_auc += fold.auc;
  CHECK(mean_auc / 4.0 > 0.8);
}

TEST_CASE("run_trials aggregates: degenerate single trial, ordering, determinism") {
  const auto records = synthetic_records(50, 5, 0.8, 37);
  LearnerSpec spec;
  spec.kind = LearnerKind::knn;
  PipelineOptions options;

  const auto single = run_trials(spec, records, 5, 1, 7, FoldStrategy::stratified, options);
  CHECK(single.accuracy.best == single.accuracy.top10_mean);
  CHECK(single.auc.best == single.auc.top10_mean);
  CHECK(single.accuracy.best == single.trials[0].mean_accuracy);

  const auto many = run_trials(spec, records, 5, 25, 7, FoldStrategy::stratified, options);
  CHECK(many.accuracy.top10_mean <= many.accuracy.best);
  CHECK(many.auc.top10_mean <= many.auc.best);
  CHECK(many.trials.size() == 25);
  for (std::size_t t = 0; t < many.trials.size(); ++t) {
    CHECK(many.trials[t].fold_seed == 7 + t);
  }

  const auto repeat = run_trials(spec, records, 5, 25, 7, FoldStrategy::stratified, options);
  for (std::size_t t = 0; t < many.trials.size(); ++t) {
    CHECK(many.trials[t].mean_accuracy == repeat.trials[t].mean_accuracy);
    CHECK(many.trials[t].mean_auc == repeat.trials[t].mean_auc);
  }
}

TEST_CASE("report serialization is stable and self-consistent") {
  const auto records = synthetic_records(30, 4, 0.8, 41);
  LearnerSpec spec;
  spec.kind = LearnerKind::decision_tree;
  EvalReport report;
  report.config = {{"subcommand", "test"}};
  report.config_hash = "deadbeefdeadbeef";
  report.classifiers.push_back(
      run_trials(spec, records, 3, 4, 11, FoldStrategy::stratified, PipelineOptions{}));

  const auto a = report_to_json(report).dump(2);
  const auto b = report_to_json(report).dump(2);
  CHECK(a == b);

  const std::string csv = report_to_csv(report);
  CHECK(csv.find("classifier,trial,fold,accuracy,auc,tp,fp,fn,tn") == 0);
  CHECK(csv.find("decision_tree,0,0,") != std::string::npos);

  const std::string confusion = confusion_to_csv(report);
  CHECK(confusion.find("decision_tree,deceptive,") != std::string::npos);
  CHECK(confusion.find("decision_tree,truthful,") != std::string::npos);

  const std::string table = summary_table(report);
  CHECK(table.find("decision_tree") != std::string::npos);
}
