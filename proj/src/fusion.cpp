#include "estkit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "estkit/errors.hpp"
#include "estkit/io.hpp"

namespace estkit {

std::size_t FeatureBlock::index_of(std::string_view clip_id) const {
  auto it = std::lower_bound(clip_ids.begin(), clip_ids.end(), clip_id);
  if (it == clip_ids.end() || *it != clip_id) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - clip_ids.begin());
}

void FeatureBlock::validate() const {
  if (dimension == 0) {
    throw DimensionMismatch("block '" + name + "' has dimension 0");
  }
  if (values.size() != clip_ids.size() * dimension) {
    throw DimensionMismatch("block '" + name + "' has ragged rows: " +
                            std::to_string(values.size()) + " values for " +
                            std::to_string(clip_ids.size()) + " x " +
                            std::to_string(dimension));
  }
  if (!std::is_sorted(clip_ids.begin(), clip_ids.end())) {
    throw DimensionMismatch("block '" + name + "' rows are not sorted by clip_id");
  }
}

std::vector<FeatureRecord> fuse(std::span<const FeatureBlock> blocks,
                                const CorpusManifest& manifest) {
  std::size_t total_dim = 0;
  for (const FeatureBlock& block : blocks) {
    block.validate();
    total_dim += block.dimension;
    // Blocks and manifest must describe the same clip set.
    for (const std::string& id : block.clip_ids) {
      if (manifest.find(id) == nullptr) {
        throw MissingClip("block '" + block.name + "' has clip '" + id +
                          "' that is not in the manifest");
      }
    }
  }

  std::vector<FeatureRecord> records;
  records.reserve(manifest.rows.size());
  for (const ManifestRow& row : manifest.rows) {
    FeatureRecord record;
    record.clip_id = row.clip_id;
    record.label = row.label;
    record.identity = row.identity;
    record.features.reserve(total_dim);
    for (const FeatureBlock& block : blocks) {
      const std::size_t idx = block.index_of(row.clip_id);
      if (idx == static_cast<std::size_t>(-1)) {
        throw MissingClip("block '" + block.name + "' lacks clip '" + row.clip_id + "'");
      }
      const auto values = block.row(idx);
      record.features.insert(record.features.end(), values.begin(), values.end());
    }
    records.push_back(std::move(record));
  }
  return records;
}

DataMatrix to_matrix(std::span<const FeatureRecord> records) {
  DataMatrix x;
  x.rows = records.size();
  x.cols = records.empty() ? 0 : records.front().features.size();
  x.values.reserve(x.rows * x.cols);
  for (const FeatureRecord& record : records) {
    if (record.features.size() != x.cols) {
      throw DimensionMismatch("record '" + record.clip_id + "' has " +
                              std::to_string(record.features.size()) + " features, expected " +
                              std::to_string(x.cols));
    }
    x.values.insert(x.values.end(), record.features.begin(), record.features.end());
  }
  return x;
}

std::vector<int> labels_of(std::span<const FeatureRecord> records) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const FeatureRecord& record : records) {
    labels.push_back(static_cast<int>(record.label));
  }
  return labels;
}

namespace {

void require_both_classes(std::span<const int> labels) {
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) {
    (y == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw DegenerateLabels("all labels are equal; correlation with the label is undefined");
  }
}

}  // namespace

std::vector<double> pearson_scores(const DataMatrix& x, std::span<const int> labels) {
  if (labels.size() != x.rows) {
    throw DimensionMismatch("pearson_scores: labels/rows mismatch");
  }
  require_both_classes(labels);
  const double n = static_cast<double>(x.rows);
  double sum_y = 0.0;
  double sum_yy = 0.0;
  for (int y : labels) {
    sum_y += y;
    sum_yy += static_cast<double>(y) * y;
  }
  const double var_y = n * sum_yy - sum_y * sum_y;

  std::vector<double> scores(x.cols, 0.0);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double sum_x = 0.0;
    double sum_xx = 0.0;
    double sum_xy = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double v = x.at(i, j);
      sum_x += v;
      sum_xx += v * v;
      sum_xy += v * labels[i];
    }
    const double var_x = n * sum_xx - sum_x * sum_x;
    if (var_x <= 0.0) {
      scores[j] = 0.0;  // constant feature
      continue;
    }
    const double r = (n * sum_xy - sum_x * sum_y) / std::sqrt(var_x * var_y);
    scores[j] = std::min(std::abs(r), 1.0);
  }
  return scores;
}

std::vector<double> pearson_scores(std::span<const FeatureRecord> records) {
  return pearson_scores(to_matrix(records), labels_of(records));
}

std::vector<double> anova_f_scores(const DataMatrix& x, std::span<const int> labels) {
  if (labels.size() != x.rows) {
    throw DimensionMismatch("anova_f_scores: labels/rows mismatch");
  }
  require_both_classes(labels);
  const std::size_t n = x.rows;
  std::size_t n1 = 0;
  for (int y : labels) n1 += static_cast<std::size_t>(y == 1);
  const std::size_t n0 = n - n1;

  std::vector<double> scores(x.cols, 0.0);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double sum0 = 0.0, sum1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      (labels[i] == 1 ? sum1 : sum0) += x.at(i, j);
    }
    const double mean0 = sum0 / static_cast<double>(n0);
    const double mean1 = sum1 / static_cast<double>(n1);
    const double grand = (sum0 + sum1) / static_cast<double>(n);
    double ss_within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x.at(i, j) - (labels[i] == 1 ? mean1 : mean0);
      ss_within += d * d;
    }
    const double ss_between = static_cast<double>(n0) * (mean0 - grand) * (mean0 - grand) +
                              static_cast<double>(n1) * (mean1 - grand) * (mean1 - grand);
    if (n <= 2 || ss_within <= 0.0) {
      scores[j] = ss_between > 0.0 ? std::numeric_limits<double>::max() : 0.0;
      continue;
    }
    scores[j] = ss_between / (ss_within / static_cast<double>(n - 2));
  }
  return scores;
}

std::vector<std::size_t> SelectionMask::ascending() const {
  std::vector<std::size_t> sorted = kept_indices;
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

std::uint64_t SelectionMask::hash() const {
  io::Fnv1a h;
  h.update_u64(kept_indices.size());
  for (std::size_t idx : ascending()) {
    h.update_u64(idx);
  }
  return h.digest();
}

DataMatrix SelectionMask::apply(const DataMatrix& x) const {
  const std::vector<std::size_t> columns = ascending();
  for (std::size_t c : columns) {
    if (c >= x.cols) {
      throw DimensionMismatch("selection index " + std::to_string(c) + " out of range for " +
                              std::to_string(x.cols) + " columns");
    }
  }
  DataMatrix out;
  out.rows = x.rows;
  out.cols = columns.size();
  out.values.resize(out.rows * out.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out.at(i, j) = x.at(i, columns[j]);
    }
  }
  return out;
}

SelectionMask select_top_k(std::span<const double> scores, std::size_t k) {
  if (k == 0 || k > scores.size()) {
    throw std::invalid_argument("select_top_k: k must be in [1, dimension]");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  SelectionMask mask;
  mask.kept_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  mask.scores.assign(scores.begin(), scores.end());
  return mask;
}

std::size_t default_select_k(std::size_t dimension, double ratio) {
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(dimension) * ratio));
  return std::clamp<std::size_t>(k, 1, dimension);
}

Standardizer Standardizer::fit(const DataMatrix& x) {
  if (x.rows == 0) {
    throw TooFewSamples("Standardizer: no rows");
  }
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.scale.assign(x.cols, 1.0);
  const double n = static_cast<double>(x.rows);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) sum += x.at(i, j);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double d = x.at(i, j) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    s.mean[j] = mean;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

void Standardizer::transform(DataMatrix& x) const {
  if (x.cols != mean.size()) {
    throw DimensionMismatch("Standardizer: fitted on " + std::to_string(mean.size()) +
                            " columns, applied to " + std::to_string(x.cols));
  }
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      x.at(i, j) = (x.at(i, j) - mean[j]) / scale[j];
    }
  }
}

}  // namespace estkit
