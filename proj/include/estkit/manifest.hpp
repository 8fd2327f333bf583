#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace estkit {

/// Binary clip label. Deceptive is the positive class everywhere (decision
/// scores, ROC-AUC, confusion matrices).
enum class ClassLabel : int {
  truthful = 0,
  deceptive = 1,
};

std::string_view label_name(ClassLabel label);

/// Case-insensitive parse of "deceptive" / "truthful".
ClassLabel parse_label(std::string_view text);

struct ManifestRow {
  std::string clip_id;
  ClassLabel label = ClassLabel::truthful;
  std::string identity;
  std::string source_video;
  std::size_t n_frames = 0;
};

/// Clip inventory. Rows are kept sorted by clip_id; ids are unique.
struct CorpusManifest {
  std::vector<ManifestRow> rows;

  const ManifestRow* find(std::string_view clip_id) const;

  /// Sorts rows and checks uniqueness and n_frames >= 1.
  void normalize();
};

}  // namespace estkit
