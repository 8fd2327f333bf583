#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "estkit/eval.hpp"
#include "estkit/synth.hpp"

// Command implementations behind the `estkit` binary. They are kept in the
// library so tests can drive them directly. Each returns a process exit
// code: 0 ok, 2 input/validation error, 3 evaluation error. Output files are
// written atomically after all computation succeeded, so a failed run leaves
// no partial artifacts, and each output records the hash of the
// configuration that produced it.

namespace estkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitEvalError = 3;

struct SynthOptions {
  SynthConfig config;
  std::filesystem::path out_dir;
};

/// Writes manifest.csv, visual_states.csv, audio_states.csv.
int cmd_synth(const SynthOptions& options);

struct ExtractOptions {
  std::filesystem::path manifest;
  std::filesystem::path visual;
  std::optional<std::filesystem::path> audio;
  std::filesystem::path out_dir;
};

/// expand -> revise -> est per clip; writes est.csv (aux-block schema) and
/// aggregate.csv (per-class distribution / transition report).
int cmd_extract(const ExtractOptions& options);

struct FuseOptions {
  std::filesystem::path manifest;
  std::vector<std::pair<std::string, std::filesystem::path>> aux;
  std::vector<std::string> blocks;  // empty means all aux blocks in given order
  std::filesystem::path out_dir;
};

/// Writes fused.csv.
int cmd_fuse(const FuseOptions& options);

struct SelectOptions {
  std::filesystem::path fused;
  std::optional<std::size_t> select_k;
  double select_ratio = 0.1;
  ScoreKind score_kind = ScoreKind::pearson;
  std::filesystem::path out_dir;
};

/// Whole-dataset filter scores; writes mask.json.
int cmd_select(const SelectOptions& options);

struct EvaluateOptions {
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> visual;
  std::optional<std::filesystem::path> audio;
  std::optional<std::filesystem::path> fused;
  std::vector<std::pair<std::string, std::filesystem::path>> aux;
  std::vector<std::string> blocks = {"est"};
  std::uint64_t seed = 0;
  int folds = 10;
  int trials = 100;
  std::optional<std::size_t> select_k;
  double select_ratio = 0.1;
  ScoreKind score_kind = ScoreKind::pearson;
  bool select_global = false;
  FoldStrategy strategy = FoldStrategy::stratified;
  bool standardize = true;
  std::vector<std::string> classifiers = {"linear_svm", "decision_tree", "random_forest", "knn",
                                          "logistic_regression"};
  std::filesystem::path out_dir;
};

/// Runs the trials protocol for every configured classifier; writes
/// report.json, report.csv, confusion.csv and prints the summary table.
int cmd_evaluate(const EvaluateOptions& options);

struct ReportOptions {
  std::filesystem::path report_json;
};

/// Reprints the summary table of an existing report.json.
int cmd_report(const ReportOptions& options);

}  // namespace estkit::cli
