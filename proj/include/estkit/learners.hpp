#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "estkit/fusion.hpp"

namespace estkit {

enum class LearnerKind {
  linear_svm,
  decision_tree,
  random_forest,
  knn,
  logistic_regression,
};

std::string_view learner_name(LearnerKind kind);
LearnerKind parse_learner(std::string_view name);  // accepts long names and lsvm/dt/rf/knn/lr

struct LearnerSpec {
  LearnerKind kind = LearnerKind::logistic_regression;
  double c = 1.0;            // regularization weight for linear SVM and LR
  int k_neighbors = 3;       // kNN
  int max_depth = 10;        // DT / RF trees
  int n_estimators = 100;    // RF
  bool bootstrap = true;     // RF; off makes each tree see the full sample
  bool feature_subsample = true;  // RF; sqrt(d) features per split when on
  double tolerance = 1e-6;   // linear solver gradient tolerance
  int max_iterations = 10000;  // linear solver evaluation cap
  std::uint64_t seed = 0;
};

/// Weight-vector model for linear SVM and logistic regression, along with
/// solver diagnostics. loss_history is the accepted objective values, which
/// are non-increasing by construction of the solver.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> loss_history;
  std::size_t evaluations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double positive_fraction = 0.0;
  std::int64_t n_samples = 0;
};

struct DecisionTreeModel {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ForestModel {
  std::vector<DecisionTreeModel> trees;
};

struct KnnModel {
  DataMatrix train;
  std::vector<int> labels;
};

struct TrainedModel {
  LearnerSpec spec;
  std::size_t dimension = 0;
  std::variant<LinearModel, DecisionTreeModel, ForestModel, KnnModel> parameters;
};

/// Fits the model described by `spec`. Deterministic given (spec, x, y):
/// identical inputs produce bit-identical models.
TrainedModel train(const LearnerSpec& spec, const DataMatrix& x, std::span<const int> y);

/// Real-valued score, monotone in class-1 confidence: the margin w.x+b for
/// linear SVM, sigmoid(w.x+b) for LR, the positive-class leaf fraction for a
/// tree, the tree mean for a forest, the positive-neighbor fraction for kNN.
double decision_score(const TrainedModel& model, std::span<const double> x);

/// 1 iff decision_score(x) exceeds the model's threshold (0 for the margin
/// model, 0.5 for the probability-like models).
int predict(const TrainedModel& model, std::span<const double> x);

double decision_threshold(LearnerKind kind);

nlohmann::ordered_json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

}  // namespace estkit
