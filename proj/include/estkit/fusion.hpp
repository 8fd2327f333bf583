#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "estkit/manifest.hpp"

namespace estkit {

/// Dense row-major matrix of sample feature values.
struct DataMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  static DataMatrix zeros(std::size_t rows, std::size_t cols) {
    return DataMatrix{rows, cols, std::vector<double>(rows * cols, 0.0)};
  }

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

/// One named feature matrix ("est", "me", "is13", ...) with one row per
/// clip. Rows are kept sorted by clip_id.
struct FeatureBlock {
  std::string name;
  std::size_t dimension = 0;
  std::vector<std::string> clip_ids;
  std::vector<double> values;  // clip_ids.size() x dimension, row-major

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dimension, dimension};
  }

  /// Row index for a clip id, or npos.
  std::size_t index_of(std::string_view clip_id) const;

  /// Throws DimensionMismatch on ragged storage, ParseError-free structural
  /// sanity check for programmatically built blocks.
  void validate() const;
};

/// One clip's fused sample: label, identity and the concatenated features.
struct FeatureRecord {
  std::string clip_id;
  ClassLabel label = ClassLabel::truthful;
  std::string identity;
  std::vector<double> features;
};

/// Concatenates the blocks in the given order, one record per manifest clip,
/// records sorted by clip_id. Every block must cover every manifest clip.
std::vector<FeatureRecord> fuse(std::span<const FeatureBlock> blocks,
                                const CorpusManifest& manifest);

DataMatrix to_matrix(std::span<const FeatureRecord> records);
std::vector<int> labels_of(std::span<const FeatureRecord> records);

/// Absolute Pearson correlation of each feature column with the labels.
/// Zero-variance columns score 0. Throws DegenerateLabels when only one
/// class is present.
std::vector<double> pearson_scores(const DataMatrix& x, std::span<const int> labels);
std::vector<double> pearson_scores(std::span<const FeatureRecord> records);

/// One-way ANOVA F statistic per feature column (optional alternative
/// ranking). A column with zero within-class variance maps to a large
/// finite sentinel so score vectors stay serializable.
std::vector<double> anova_f_scores(const DataMatrix& x, std::span<const int> labels);

struct SelectionMask {
  /// Unique feature indices, sorted by descending score then ascending index.
  std::vector<std::size_t> kept_indices;
  /// Score of every original feature (not just the kept ones).
  std::vector<double> scores;

  /// Kept indices in ascending order; this is the column order produced by
  /// apply().
  std::vector<std::size_t> ascending() const;

  /// FNV-1a over k and the ascending kept indices.
  std::uint64_t hash() const;

  DataMatrix apply(const DataMatrix& x) const;
};

/// Keeps the k best-scoring features (descending score, ties broken by
/// ascending index).
SelectionMask select_top_k(std::span<const double> scores, std::size_t k);

/// Default selection size: round(dimension * ratio), clamped to [1, dimension].
std::size_t default_select_k(std::size_t dimension, double ratio = 0.1);

/// Per-feature z-scoring. Constant columns get scale 1 so they map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const DataMatrix& x);
  void transform(DataMatrix& x) const;
};

}  // namespace estkit
