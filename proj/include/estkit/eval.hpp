#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "estkit/fusion.hpp"
#include "estkit/learners.hpp"

namespace estkit {

enum class FoldStrategy {
  shuffled,
  stratified,
  identity_grouped,
};

std::string_view fold_strategy_name(FoldStrategy strategy);
FoldStrategy parse_fold_strategy(std::string_view name);

/// A K-way partition of the clip set. Deterministic in (seed, strategy):
/// the same seed reproduces the same assignment on every platform (the PRNG
/// is pinned, see rng.hpp).
struct FoldPlan {
  int k = 10;
  FoldStrategy strategy = FoldStrategy::stratified;
  std::uint64_t seed = 0;
  std::vector<int> assignments;  // fold index per record
};

/// Builds a fold plan over n = labels.size() clips.
///   shuffled          round-robin deal of a shuffled order; sizes differ <= 1
///   stratified        per-class shuffle with a rolling fold pointer; per-fold
///                     class counts and fold sizes both stay within 1
///   identity_grouped  all clips of one identity land in the same fold
FoldPlan make_folds(std::span<const int> labels, std::span<const std::string> identities, int k,
                    std::uint64_t seed, FoldStrategy strategy);

FoldPlan make_folds(std::span<const FeatureRecord> records, int k, std::uint64_t seed,
                    FoldStrategy strategy);

/// Probability that a random positive outscores a random negative, ties
/// counted one-half (average-rank method). Throws SingleClassTest unless
/// both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  double accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
  }
};

enum class ScoreKind { pearson, anova };

std::string_view score_kind_name(ScoreKind kind);

struct PipelineOptions {
  /// Number of features kept by filter selection; unset disables selection.
  std::optional<std::size_t> select_k;
  ScoreKind score_kind = ScoreKind::pearson;
  /// Fit the selection mask once on the full dataset instead of per fold.
  bool select_global = false;
  /// Per-feature z-scoring fitted on the training folds.
  bool standardize = true;
};

struct FoldMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
  Confusion confusion;
  std::uint64_t selection_hash = 0;  // 0 when selection is disabled
};

/// For each fold: fits selection, standardization and the model on the
/// training folds only (unless select_global), then evaluates on the held-out
/// fold. The model seed for (trial, fold) derives from spec.seed.
std::vector<FoldMetrics> cross_validate(const LearnerSpec& spec,
                                        std::span<const FeatureRecord> records,
                                        const FoldPlan& plan, const PipelineOptions& options = {},
                                        std::uint64_t trial_index = 0);

struct TrialResult {
  std::uint64_t fold_seed = 0;
  double mean_accuracy = 0.0;
  double mean_auc = 0.0;
  std::vector<FoldMetrics> folds;
};

struct MetricAggregate {
  double best = 0.0;
  std::size_t best_trial = 0;
  double top10_mean = 0.0;
};

struct ClassifierResult {
  LearnerSpec spec;
  std::vector<TrialResult> trials;
  MetricAggregate accuracy;
  MetricAggregate auc;
};

/// Runs n_trials rounds of K-fold cross-validation; trial i uses fold seed
/// base_seed + i. Aggregates (best trial, mean of the top 10 trials) are
/// computed per metric independently.
ClassifierResult run_trials(const LearnerSpec& spec, std::span<const FeatureRecord> records,
                            int k, int n_trials, std::uint64_t base_seed, FoldStrategy strategy,
                            const PipelineOptions& options = {});

MetricAggregate aggregate_metric(std::span<const double> per_trial_values);

struct EvalReport {
  nlohmann::ordered_json config;  // verbatim run configuration echo
  std::string config_hash;
  std::vector<ClassifierResult> classifiers;
};

nlohmann::ordered_json report_to_json(const EvalReport& report);

/// Flat per-fold metrics: classifier,trial,fold,accuracy,auc,tp,fp,fn,tn.
std::string report_to_csv(const EvalReport& report);

/// Pooled confusion matrix of each classifier's best-accuracy trial,
/// rows = actual class, columns = predicted class.
std::string confusion_to_csv(const EvalReport& report);

/// Fixed-width per-classifier table of best / top-10 accuracy and ROC-AUC.
std::string summary_table(const EvalReport& report);

}  // namespace estkit
