#include "estkit/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "estkit/errors.hpp"
#include "estkit/rng.hpp"

namespace estkit {

std::string_view learner_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::linear_svm: return "linear_svm";
    case LearnerKind::decision_tree: return "decision_tree";
    case LearnerKind::random_forest: return "random_forest";
    case LearnerKind::knn: return "knn";
    case LearnerKind::logistic_regression: return "logistic_regression";
  }
  return "unknown";
}

LearnerKind parse_learner(std::string_view name) {
  if (name == "linear_svm" || name == "lsvm" || name == "svm") return LearnerKind::linear_svm;
  if (name == "decision_tree" || name == "dt") return LearnerKind::decision_tree;
  if (name == "random_forest" || name == "rf") return LearnerKind::random_forest;
  if (name == "knn") return LearnerKind::knn;
  if (name == "logistic_regression" || name == "lr") return LearnerKind::logistic_regression;
  throw std::invalid_argument("unknown classifier: '" + std::string(name) + "'");
}

double decision_threshold(LearnerKind kind) {
  return kind == LearnerKind::linear_svm ? 0.0 : 0.5;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Objective {
  double value = 0.0;
  std::vector<double> gradient;  // d+1 entries, bias last
};

// theta = (w, b) with the bias unregularized; y in {-1, +1}.
Objective svm_objective(const DataMatrix& x, std::span<const double> y_signed, double c,
                        std::span<const double> theta) {
  const std::size_t d = x.cols;
  Objective obj;
  obj.gradient.assign(d + 1, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    obj.value += 0.5 * theta[j] * theta[j];
    obj.gradient[j] = theta[j];
  }
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double score = dot(x.row(i), theta.first(d)) + theta[d];
    const double margin = 1.0 - y_signed[i] * score;
    if (margin > 0.0) {
      obj.value += c * margin;
      const double g = -c * y_signed[i];
      const auto row = x.row(i);
      for (std::size_t j = 0; j < d; ++j) obj.gradient[j] += g * row[j];
      obj.gradient[d] += g;
    }
  }
  return obj;
}

Objective logistic_objective(const DataMatrix& x, std::span<const double> y_signed, double c,
                             std::span<const double> theta) {
  const std::size_t d = x.cols;
  Objective obj;
  obj.gradient.assign(d + 1, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    obj.value += 0.5 * theta[j] * theta[j];
    obj.gradient[j] = theta[j];
  }
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double score = dot(x.row(i), theta.first(d)) + theta[d];
    const double z = -y_signed[i] * score;
    obj.value += c * softplus(z);
    const double g = -c * y_signed[i] * sigmoid(z);
    const auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) obj.gradient[j] += g * row[j];
    obj.gradient[d] += g;
  }
  return obj;
}

double l2_norm(std::span<const double> v) {
  return std::sqrt(dot(v, v));
}

// Gradient descent with a backtracking step that only ever accepts a strict
// objective decrease, so the recorded loss history is monotone. The step
// grows again after each accepted move. Every objective evaluation counts
// toward the cap.
template <typename ObjectiveFn>
LinearModel minimize_descent(ObjectiveFn&& objective, std::size_t dim, double tolerance,
                             int max_evaluations) {
  std::vector<double> theta(dim + 1, 0.0);
  std::vector<double> candidate(dim + 1, 0.0);

  LinearModel model;
  Objective current = objective(theta);
  int evaluations = 1;
  model.loss_history.push_back(current.value);

  double step = 1.0;
  while (evaluations < max_evaluations) {
    const double grad_norm = l2_norm(current.gradient);
    if (grad_norm < tolerance) {
      model.converged = true;
      break;
    }
    bool accepted = false;
    while (evaluations < max_evaluations) {
      for (std::size_t j = 0; j <= dim; ++j) {
        candidate[j] = theta[j] - step * current.gradient[j];
      }
      Objective next = objective(candidate);
      ++evaluations;
      if (next.value <= current.value - 1e-4 * step * grad_norm * grad_norm) {
        theta.swap(candidate);
        current = std::move(next);
        model.loss_history.push_back(current.value);
        step = std::min(step * 1.25, 1e8);
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-14) break;
    }
    if (!accepted) break;  // stalled at a kink or the evaluation cap
  }

  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(dim));
  model.bias = theta[dim];
  model.evaluations = static_cast<std::size_t>(evaluations);
  model.gradient_norm = l2_norm(current.gradient);
  if (model.gradient_norm < tolerance) model.converged = true;
  return model;
}

std::vector<double> signed_labels(std::span<const int> y) {
  std::vector<double> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s[i] = y[i] == 1 ? 1.0 : -1.0;
  return s;
}

void require_two_classes(std::span<const int> y) {
  bool pos = false, neg = false;
  for (int v : y) (v == 1 ? pos : neg) = true;
  if (!pos || !neg) {
    throw SingleClassTraining("training data contains a single class");
  }
}

// ---------------------------------------------------------------------------
// Decision trees

struct TreeBuilder {
  const DataMatrix& x;
  std::span<const int> y;
  int max_depth;
  std::size_t features_per_split;  // == x.cols disables subsampling
  Rng* rng;                        // only used when subsampling

  DecisionTreeModel model;

  static double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(total);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  }

  std::vector<std::size_t> split_features() {
    std::vector<std::size_t> all(x.cols);
    std::iota(all.begin(), all.end(), 0);
    if (features_per_split >= x.cols) return all;
    // Partial Fisher-Yates, then ascending order so the feature scan order
    // stays index-sorted.
    for (std::size_t i = 0; i < features_per_split; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng->below(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(features_per_split);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::int32_t build(std::vector<std::size_t>& indices, int depth) {
    const std::size_t n = indices.size();
    std::size_t pos = 0;
    for (std::size_t i : indices) pos += static_cast<std::size_t>(y[i] == 1);

    const auto node_id = static_cast<std::int32_t>(model.nodes.size());
    model.nodes.emplace_back();
    model.nodes[static_cast<std::size_t>(node_id)].positive_fraction =
        n == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(n);
    model.nodes[static_cast<std::size_t>(node_id)].n_samples = static_cast<std::int64_t>(n);

    const bool pure = pos == 0 || pos == n;
    if (pure || depth >= max_depth || n < 2) return node_id;

    // Best split: largest Gini decrease; ties go to the lowest feature
    // index, then the lowest threshold (guaranteed by scan order).
    const double parent_impurity = gini(pos, n);
    double best_gain = -1.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> column(n);
    for (std::size_t f : split_features()) {
      for (std::size_t i = 0; i < n; ++i) {
        column[i] = {x.at(indices[i], f), y[indices[i]]};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t left_n = 0, left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left_n;
        left_pos += static_cast<std::size_t>(column[i].second == 1);
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t right_n = n - left_n;
        const double weighted =
            (static_cast<double>(left_n) * gini(left_pos, left_n) +
             static_cast<double>(right_n) * gini(pos - left_pos, right_n)) /
            static_cast<double>(n);
        const double gain = parent_impurity - weighted;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = column[i].first + 0.5 * (column[i + 1].first - column[i].first);
        }
      }
    }

    if (best_gain < 0.0) return node_id;  // no feature had two distinct values

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : indices) {
      (x.at(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    const std::int32_t left = build(left_idx, depth + 1);
    const std::int32_t right = build(right_idx, depth + 1);
    TreeNode& node = model.nodes[static_cast<std::size_t>(node_id)];
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return node_id;
  }
};

DecisionTreeModel fit_tree(const DataMatrix& x, std::span<const int> y,
                           std::vector<std::size_t> indices, int max_depth,
                           std::size_t features_per_split, Rng* rng) {
  TreeBuilder builder{x, y, max_depth, features_per_split, rng, {}};
  builder.build(indices, 0);
  return std::move(builder.model);
}

double tree_score(const DecisionTreeModel& tree, std::span<const double> sample) {
  std::int32_t node_id = 0;
  while (true) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    if (node.feature < 0) return node.positive_fraction;
    node_id = sample[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                               : node.right;
  }
}

}  // namespace

TrainedModel train(const LearnerSpec& spec, const DataMatrix& x, std::span<const int> y) {
  if (x.rows != y.size()) {
    throw DimensionMismatch("train: rows/labels mismatch");
  }
  if (x.rows < 2) {
    throw TooFewSamples("train: need at least 2 samples");
  }

  TrainedModel model;
  model.spec = spec;
  model.dimension = x.cols;

  switch (spec.kind) {
    case LearnerKind::linear_svm: {
      require_two_classes(y);
      const std::vector<double> ys = signed_labels(y);
      model.parameters = minimize_descent(
          [&](std::span<const double> theta) { return svm_objective(x, ys, spec.c, theta); },
          x.cols, spec.tolerance, spec.max_iterations);
      break;
    }
    case LearnerKind::logistic_regression: {
      require_two_classes(y);
      const std::vector<double> ys = signed_labels(y);
      model.parameters = minimize_descent(
          [&](std::span<const double> theta) { return logistic_objective(x, ys, spec.c, theta); },
          x.cols, spec.tolerance, spec.max_iterations);
      break;
    }
    case LearnerKind::decision_tree: {
      require_two_classes(y);
      std::vector<std::size_t> indices(x.rows);
      std::iota(indices.begin(), indices.end(), 0);
      model.parameters = fit_tree(x, y, std::move(indices), spec.max_depth, x.cols, nullptr);
      break;
    }
    case LearnerKind::random_forest: {
      require_two_classes(y);
      if (spec.n_estimators < 1) {
        throw std::invalid_argument("random_forest: n_estimators must be positive");
      }
      const std::size_t features_per_split =
          spec.feature_subsample
              ? std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols)))))
              : x.cols;
      ForestModel forest;
      forest.trees.reserve(static_cast<std::size_t>(spec.n_estimators));
      for (int t = 0; t < spec.n_estimators; ++t) {
        Rng rng(derive_seed(spec.seed, {0x666F7265u, static_cast<std::uint64_t>(t)}));
        std::vector<std::size_t> indices(x.rows);
        if (spec.bootstrap) {
          for (std::size_t i = 0; i < x.rows; ++i) {
            indices[i] = static_cast<std::size_t>(rng.below(x.rows));
          }
          std::sort(indices.begin(), indices.end());
        } else {
          std::iota(indices.begin(), indices.end(), 0);
        }
        forest.trees.push_back(
            fit_tree(x, y, std::move(indices), spec.max_depth, features_per_split, &rng));
      }
      model.parameters = std::move(forest);
      break;
    }
    case LearnerKind::knn: {
      if (spec.k_neighbors < 1) {
        throw std::invalid_argument("knn: k_neighbors must be positive");
      }
      KnnModel knn;
      knn.train = x;
      knn.labels.assign(y.begin(), y.end());
      model.parameters = std::move(knn);
      break;
    }
  }
  return model;
}

double decision_score(const TrainedModel& model, std::span<const double> x) {
  if (x.size() != model.dimension) {
    throw DimensionMismatch("decision_score: sample has " + std::to_string(x.size()) +
                            " features, model expects " + std::to_string(model.dimension));
  }
  switch (model.spec.kind) {
    case LearnerKind::linear_svm: {
      const auto& linear = std::get<LinearModel>(model.parameters);
      return dot(linear.weights, x) + linear.bias;
    }
    case LearnerKind::logistic_regression: {
      const auto& linear = std::get<LinearModel>(model.parameters);
      return sigmoid(dot(linear.weights, x) + linear.bias);
    }
    case LearnerKind::decision_tree:
      return tree_score(std::get<DecisionTreeModel>(model.parameters), x);
    case LearnerKind::random_forest: {
      const auto& forest = std::get<ForestModel>(model.parameters);
      double sum = 0.0;
      for (const DecisionTreeModel& tree : forest.trees) sum += tree_score(tree, x);
      return sum / static_cast<double>(forest.trees.size());
    }
    case LearnerKind::knn: {
      const auto& knn = std::get<KnnModel>(model.parameters);
      const std::size_t n = knn.train.rows;
      std::vector<std::pair<double, std::size_t>> distances(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = knn.train.row(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double d = row[j] - x[j];
          d2 += d * d;
        }
        distances[i] = {d2, i};
      }
      // Stable sort on distance alone: ties at the k-th distance resolve in
      // training-set order.
      std::stable_sort(distances.begin(), distances.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(model.spec.k_neighbors), n);
      std::size_t votes = 0;
      for (std::size_t i = 0; i < k; ++i) {
        votes += static_cast<std::size_t>(knn.labels[distances[i].second] == 1);
      }
      return static_cast<double>(votes) / static_cast<double>(k);
    }
  }
  throw std::logic_error("decision_score: unhandled learner kind");
}

int predict(const TrainedModel& model, std::span<const double> x) {
  return decision_score(model, x) > decision_threshold(model.spec.kind) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::ordered_json tree_to_json(const DecisionTreeModel& tree) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const TreeNode& node : tree.nodes) {
    nodes.push_back({{"feature", node.feature},
                     {"threshold", node.threshold},
                     {"left", node.left},
                     {"right", node.right},
                     {"positive_fraction", node.positive_fraction},
                     {"n_samples", node.n_samples}});
  }
  return nodes;
}

DecisionTreeModel tree_from_json(const nlohmann::json& nodes) {
  DecisionTreeModel tree;
  for (const auto& n : nodes) {
    TreeNode node;
    node.feature = n.at("feature").get<std::int32_t>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<std::int32_t>();
    node.right = n.at("right").get<std::int32_t>();
    node.positive_fraction = n.at("positive_fraction").get<double>();
    node.n_samples = n.at("n_samples").get<std::int64_t>();
    tree.nodes.push_back(node);
  }
  return tree;
}

}  // namespace

nlohmann::ordered_json model_to_json(const TrainedModel& model) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = std::string(learner_name(model.spec.kind));
  doc["hyperparameters"] = {{"c", model.spec.c},
                            {"k_neighbors", model.spec.k_neighbors},
                            {"max_depth", model.spec.max_depth},
                            {"n_estimators", model.spec.n_estimators},
                            {"bootstrap", model.spec.bootstrap},
                            {"feature_subsample", model.spec.feature_subsample},
                            {"tolerance", model.spec.tolerance},
                            {"max_iterations", model.spec.max_iterations}};
  doc["seed"] = model.spec.seed;
  doc["dimension"] = model.dimension;

  nlohmann::ordered_json params;
  switch (model.spec.kind) {
    case LearnerKind::linear_svm:
    case LearnerKind::logistic_regression: {
      const auto& linear = std::get<LinearModel>(model.parameters);
      params["weights"] = linear.weights;
      params["bias"] = linear.bias;
      break;
    }
    case LearnerKind::decision_tree:
      params["nodes"] = tree_to_json(std::get<DecisionTreeModel>(model.parameters));
      break;
    case LearnerKind::random_forest: {
      nlohmann::ordered_json trees = nlohmann::ordered_json::array();
      for (const DecisionTreeModel& tree : std::get<ForestModel>(model.parameters).trees) {
        trees.push_back(tree_to_json(tree));
      }
      params["trees"] = std::move(trees);
      break;
    }
    case LearnerKind::knn: {
      const auto& knn = std::get<KnnModel>(model.parameters);
      params["rows"] = knn.train.rows;
      params["cols"] = knn.train.cols;
      params["values"] = knn.train.values;
      params["labels"] = knn.labels;
      break;
    }
  }
  doc["parameters"] = std::move(params);
  return doc;
}

TrainedModel model_from_json(const nlohmann::json& doc) {
  if (doc.at("format_version").get<int>() != 1) {
    throw std::invalid_argument("model_from_json: unsupported format_version");
  }
  TrainedModel model;
  model.spec.kind = parse_learner(doc.at("kind").get<std::string>());
  const auto& hp = doc.at("hyperparameters");
  model.spec.c = hp.at("c").get<double>();
  model.spec.k_neighbors = hp.at("k_neighbors").get<int>();
  model.spec.max_depth = hp.at("max_depth").get<int>();
  model.spec.n_estimators = hp.at("n_estimators").get<int>();
  model.spec.bootstrap = hp.at("bootstrap").get<bool>();
  model.spec.feature_subsample = hp.at("feature_subsample").get<bool>();
  model.spec.tolerance = hp.at("tolerance").get<double>();
  model.spec.max_iterations = hp.at("max_iterations").get<int>();
  model.spec.seed = doc.at("seed").get<std::uint64_t>();
  model.dimension = doc.at("dimension").get<std::size_t>();

  const auto& params = doc.at("parameters");
  switch (model.spec.kind) {
    case LearnerKind::linear_svm:
    case LearnerKind::logistic_regression: {
      LinearModel linear;
      linear.weights = params.at("weights").get<std::vector<double>>();
      linear.bias = params.at("bias").get<double>();
      model.parameters = std::move(linear);
      break;
    }
    case LearnerKind::decision_tree:
      model.parameters = tree_from_json(params.at("nodes"));
      break;
    case LearnerKind::random_forest: {
      ForestModel forest;
      for (const auto& tree : params.at("trees")) {
        forest.trees.push_back(tree_from_json(tree));
      }
      model.parameters = std::move(forest);
      break;
    }
    case LearnerKind::knn: {
      KnnModel knn;
      knn.train.rows = params.at("rows").get<std::size_t>();
      knn.train.cols = params.at("cols").get<std::size_t>();
      knn.train.values = params.at("values").get<std::vector<double>>();
      knn.labels = params.at("labels").get<std::vector<int>>();
      model.parameters = std::move(knn);
      break;
    }
  }
  return model;
}

}  // namespace estkit
