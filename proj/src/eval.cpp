#include "estkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "estkit/errors.hpp"
#include "estkit/io.hpp"
#include "estkit/rng.hpp"

namespace estkit {

std::string_view fold_strategy_name(FoldStrategy strategy) {
  switch (strategy) {
    case FoldStrategy::shuffled: return "shuffled";
    case FoldStrategy::stratified: return "stratified";
    case FoldStrategy::identity_grouped: return "identity_grouped";
  }
  return "unknown";
}

FoldStrategy parse_fold_strategy(std::string_view name) {
  if (name == "shuffled") return FoldStrategy::shuffled;
  if (name == "stratified") return FoldStrategy::stratified;
  if (name == "identity_grouped" || name == "identity-grouped") {
    return FoldStrategy::identity_grouped;
  }
  throw std::invalid_argument("unknown fold strategy: '" + std::string(name) + "'");
}

std::string_view score_kind_name(ScoreKind kind) {
  return kind == ScoreKind::pearson ? "pearson" : "anova";
}

FoldPlan make_folds(std::span<const int> labels, std::span<const std::string> identities, int k,
                    std::uint64_t seed, FoldStrategy strategy) {
  const std::size_t n = labels.size();
  if (k < 2) {
    throw std::invalid_argument("make_folds: K must be at least 2");
  }
  if (strategy != FoldStrategy::identity_grouped && static_cast<std::size_t>(k) > n) {
    throw TooFewSamples("make_folds: K = " + std::to_string(k) + " exceeds " +
                        std::to_string(n) + " clips");
  }
  if (strategy == FoldStrategy::identity_grouped && identities.size() != n) {
    throw DimensionMismatch("make_folds: identities/labels mismatch");
  }

  FoldPlan plan;
  plan.k = k;
  plan.strategy = strategy;
  plan.seed = seed;
  plan.assignments.assign(n, -1);
  Rng rng(seed);

  switch (strategy) {
    case FoldStrategy::shuffled: {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::size_t i = 0; i < n; ++i) {
        plan.assignments[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
      }
      break;
    }
    case FoldStrategy::stratified: {
      // Deal each class round-robin, continuing the fold pointer across
      // classes so total fold sizes also stay within one of each other.
      std::size_t pointer = 0;
      for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
          if (labels[i] == cls) members.push_back(i);
        }
        rng.shuffle(members);
        for (std::size_t m : members) {
          plan.assignments[m] = static_cast<int>(pointer % static_cast<std::size_t>(k));
          ++pointer;
        }
      }
      break;
    }
    case FoldStrategy::identity_grouped: {
      std::map<std::string, std::vector<std::size_t>> groups;
      for (std::size_t i = 0; i < n; ++i) {
        groups[identities[i]].push_back(i);
      }
      if (groups.size() < static_cast<std::size_t>(k)) {
        throw TooFewSamples("make_folds: K = " + std::to_string(k) + " exceeds " +
                            std::to_string(groups.size()) + " identity groups");
      }
      std::vector<const std::vector<std::size_t>*> order;
      order.reserve(groups.size());
      for (const auto& [identity, members] : groups) order.push_back(&members);
      rng.shuffle(order);
      // Largest groups first (stable on the shuffled order), each into the
      // currently smallest fold.
      std::stable_sort(order.begin(), order.end(),
                       [](const auto* a, const auto* b) { return a->size() > b->size(); });
      std::vector<std::size_t> fold_sizes(static_cast<std::size_t>(k), 0);
      for (const auto* members : order) {
        const std::size_t target = static_cast<std::size_t>(
            std::min_element(fold_sizes.begin(), fold_sizes.end()) - fold_sizes.begin());
        for (std::size_t m : *members) plan.assignments[m] = static_cast<int>(target);
        fold_sizes[target] += members->size();
      }
      break;
    }
  }
  return plan;
}

FoldPlan make_folds(std::span<const FeatureRecord> records, int k, std::uint64_t seed,
                    FoldStrategy strategy) {
  std::vector<int> labels = labels_of(records);
  std::vector<std::string> identities;
  identities.reserve(records.size());
  for (const FeatureRecord& r : records) identities.push_back(r.identity);
  return make_folds(labels, identities, k, seed, strategy);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatch("roc_auc: scores/labels mismatch");
  }
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<std::size_t>(y == 1);
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw SingleClassTest("roc_auc: both classes are required");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups, then the Mann-Whitney identity.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double average_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += average_rank;
    }
    i = j + 1;
  }
  const double n_pos_d = static_cast<double>(n_pos);
  return (positive_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

namespace {

DataMatrix rows_subset(const DataMatrix& x, std::span<const std::size_t> indices) {
  DataMatrix out;
  out.rows = indices.size();
  out.cols = x.cols;
  out.values.reserve(out.rows * out.cols);
  for (std::size_t i : indices) {
    const auto row = x.row(i);
    out.values.insert(out.values.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<int> labels_subset(std::span<const int> y, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(y[i]);
  return out;
}

std::vector<double> compute_scores(ScoreKind kind, const DataMatrix& x, std::span<const int> y) {
  return kind == ScoreKind::pearson ? pearson_scores(x, y) : anova_f_scores(x, y);
}

}  // namespace

std::vector<FoldMetrics> cross_validate(const LearnerSpec& spec,
                                        std::span<const FeatureRecord> records,
                                        const FoldPlan& plan, const PipelineOptions& options,
                                        std::uint64_t trial_index) {
  if (plan.assignments.size() != records.size()) {
    throw DimensionMismatch("cross_validate: fold plan does not cover the records");
  }
  const DataMatrix full = to_matrix(records);
  const std::vector<int> labels = labels_of(records);

  std::optional<SelectionMask> global_mask;
  if (options.select_k && options.select_global) {
    global_mask = select_top_k(compute_scores(options.score_kind, full, labels),
                               std::min(*options.select_k, full.cols));
  }

  std::vector<FoldMetrics> metrics;
  metrics.reserve(static_cast<std::size_t>(plan.k));
  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      (plan.assignments[i] == fold ? test_idx : train_idx).push_back(i);
    }
    DataMatrix x_train = rows_subset(full, train_idx);
    DataMatrix x_test = rows_subset(full, test_idx);
    const std::vector<int> y_train = labels_subset(labels, train_idx);
    const std::vector<int> y_test = labels_subset(labels, test_idx);

    FoldMetrics fold_metrics;

    LearnerSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, {trial_index, static_cast<std::uint64_t>(fold)});
    try {
      if (options.select_k) {
        SelectionMask mask =
            options.select_global
                ? *global_mask
                : select_top_k(compute_scores(options.score_kind, x_train, y_train),
                               std::min(*options.select_k, x_train.cols));
        fold_metrics.selection_hash = mask.hash();
        x_train = mask.apply(x_train);
        x_test = mask.apply(x_test);
      }
      if (options.standardize) {
        const Standardizer scaler = Standardizer::fit(x_train);
        scaler.transform(x_train);
        scaler.transform(x_test);
      }

      const TrainedModel model = train(fold_spec, x_train, y_train);

      std::vector<double> scores(x_test.rows);
      const double threshold = decision_threshold(spec.kind);
      for (std::size_t i = 0; i < x_test.rows; ++i) {
        scores[i] = decision_score(model, x_test.row(i));
        const int predicted = scores[i] > threshold ? 1 : 0;
        if (y_test[i] == 1) {
          (predicted == 1 ? fold_metrics.confusion.tp : fold_metrics.confusion.fn) += 1;
        } else {
          (predicted == 1 ? fold_metrics.confusion.fp : fold_metrics.confusion.tn) += 1;
        }
      }
      fold_metrics.accuracy = fold_metrics.confusion.accuracy();
      fold_metrics.auc = roc_auc(scores, y_test);
    } catch (const SingleClassTraining& e) {
      throw SingleClassTraining("fold " + std::to_string(fold) + ": " + e.what());
    } catch (const SingleClassTest& e) {
      throw SingleClassTest("fold " + std::to_string(fold) + ": " + e.what());
    } catch (const TooFewSamples& e) {
      throw TooFewSamples("fold " + std::to_string(fold) + ": " + e.what());
    } catch (const DegenerateLabels& e) {
      throw DegenerateLabels("fold " + std::to_string(fold) + ": " + e.what());
    }
    metrics.push_back(std::move(fold_metrics));
  }
  return metrics;
}

MetricAggregate aggregate_metric(std::span<const double> per_trial_values) {
  MetricAggregate agg;
  if (per_trial_values.empty()) return agg;
  std::vector<double> sorted(per_trial_values.begin(), per_trial_values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  agg.best = sorted.front();
  const std::size_t top = std::min<std::size_t>(10, sorted.size());
  agg.top10_mean = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top), 0.0) /
                   static_cast<double>(top);
  for (std::size_t i = 0; i < per_trial_values.size(); ++i) {
    if (per_trial_values[i] == agg.best) {
      agg.best_trial = i;
      break;
    }
  }
  return agg;
}

ClassifierResult run_trials(const LearnerSpec& spec, std::span<const FeatureRecord> records,
                            int k, int n_trials, std::uint64_t base_seed, FoldStrategy strategy,
                            const PipelineOptions& options) {
  if (n_trials < 1) {
    throw std::invalid_argument("run_trials: n_trials must be positive");
  }
  ClassifierResult result;
  result.spec = spec;
  result.trials.reserve(static_cast<std::size_t>(n_trials));

  std::vector<double> accuracies, aucs;
  for (int trial = 0; trial < n_trials; ++trial) {
    TrialResult t;
    t.fold_seed = base_seed + static_cast<std::uint64_t>(trial);
    const FoldPlan plan = make_folds(records, k, t.fold_seed, strategy);
    t.folds = cross_validate(spec, records, plan, options, static_cast<std::uint64_t>(trial));
    double acc_sum = 0.0, auc_sum = 0.0;
    for (const FoldMetrics& m : t.folds) {
      acc_sum += m.accuracy;
      auc_sum += m.auc;
    }
    t.mean_accuracy = acc_sum / static_cast<double>(t.folds.size());
    t.mean_auc = auc_sum / static_cast<double>(t.folds.size());
    accuracies.push_back(t.mean_accuracy);
    aucs.push_back(t.mean_auc);
    result.trials.push_back(std::move(t));
  }
  result.accuracy = aggregate_metric(accuracies);
  result.auc = aggregate_metric(aucs);
  return result;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["config_hash"] = report.config_hash;
  doc["config"] = report.config;
  doc["prng"] = "mt19937_64 raw output; task seeds via splitmix64 chain";
  doc["aggregate_note"] =
      "best and top-10 mean are computed per metric independently; the best trial by accuracy "
      "and by roc_auc may differ";
  nlohmann::ordered_json classifiers = nlohmann::ordered_json::array();
  for (const ClassifierResult& c : report.classifiers) {
    nlohmann::ordered_json entry;
    entry["kind"] = std::string(learner_name(c.spec.kind));
    entry["hyperparameters"] = {{"c", c.spec.c},
                                {"k_neighbors", c.spec.k_neighbors},
                                {"max_depth", c.spec.max_depth},
                                {"n_estimators", c.spec.n_estimators}};
    entry["seed"] = c.spec.seed;
    entry["aggregates"] = {
        {"accuracy",
         {{"best", c.accuracy.best},
          {"best_trial", c.accuracy.best_trial},
          {"top10_mean", c.accuracy.top10_mean}}},
        {"roc_auc",
         {{"best", c.auc.best}, {"best_trial", c.auc.best_trial}, {"top10_mean", c.auc.top10_mean}}}};
    nlohmann::ordered_json trials = nlohmann::ordered_json::array();
    for (std::size_t ti = 0; ti < c.trials.size(); ++ti) {
      const TrialResult& t = c.trials[ti];
      nlohmann::ordered_json trial;
      trial["trial"] = ti;
      trial["fold_seed"] = t.fold_seed;
      trial["mean_accuracy"] = t.mean_accuracy;
      trial["mean_auc"] = t.mean_auc;
      nlohmann::ordered_json folds = nlohmann::ordered_json::array();
      for (std::size_t fi = 0; fi < t.folds.size(); ++fi) {
        const FoldMetrics& m = t.folds[fi];
        folds.push_back({{"fold", fi},
                         {"accuracy", m.accuracy},
                         {"auc", m.auc},
                         {"tp", m.confusion.tp},
                         {"fp", m.confusion.fp},
                         {"fn", m.confusion.fn},
                         {"tn", m.confusion.tn},
                         {"selection_hash", io::hex64(m.selection_hash)}});
      }
      trial["folds"] = std::move(folds);
      trials.push_back(std::move(trial));
    }
    entry["trials"] = std::move(trials);
    classifiers.push_back(std::move(entry));
  }
  doc["classifiers"] = std::move(classifiers);
  return doc;
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "classifier,trial,fold,accuracy,auc,tp,fp,fn,tn\n";
  for (const ClassifierResult& c : report.classifiers) {
    const std::string name(learner_name(c.spec.kind));
    for (std::size_t ti = 0; ti < c.trials.size(); ++ti) {
      const TrialResult& t = c.trials[ti];
      for (std::size_t fi = 0; fi < t.folds.size(); ++fi) {
        const FoldMetrics& m = t.folds[fi];
        out += name + ',' + std::to_string(ti) + ',' + std::to_string(fi) + ',' +
               io::format_double(m.accuracy) + ',' + io::format_double(m.auc) + ',' +
               std::to_string(m.confusion.tp) + ',' + std::to_string(m.confusion.fp) + ',' +
               std::to_string(m.confusion.fn) + ',' + std::to_string(m.confusion.tn) + '\n';
      }
    }
  }
  return out;
}

std::string confusion_to_csv(const EvalReport& report) {
  std::string out = "classifier,actual,predicted_deceptive,predicted_truthful\n";
  for (const ClassifierResult& c : report.classifiers) {
    Confusion pooled;
    if (!c.trials.empty()) {
      const TrialResult& best = c.trials[c.accuracy.best_trial];
      for (const FoldMetrics& m : best.folds) {
        pooled.tp += m.confusion.tp;
        pooled.fp += m.confusion.fp;
        pooled.fn += m.confusion.fn;
        pooled.tn += m.confusion.tn;
      }
    }
    const std::string name(learner_name(c.spec.kind));
    out += name + ",deceptive," + std::to_string(pooled.tp) + ',' + std::to_string(pooled.fn) + '\n';
    out += name + ",truthful," + std::to_string(pooled.fp) + ',' + std::to_string(pooled.tn) + '\n';
  }
  return out;
}

std::string summary_table(const EvalReport& report) {
  std::ostringstream out;
  out << "classifier            best_acc  top10_acc  best_auc  top10_auc\n";
  for (const ClassifierResult& c : report.classifiers) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-20s  %8.4f  %9.4f  %8.4f  %9.4f\n",
                  std::string(learner_name(c.spec.kind)).c_str(), c.accuracy.best,
                  c.accuracy.top10_mean, c.auc.best, c.auc.top10_mean);
    out << line;
  }
  return out.str();
}

}  // namespace estkit
