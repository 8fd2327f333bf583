#include "estkit/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "estkit/errors.hpp"

namespace estkit {

std::string_view label_name(ClassLabel label) {
  return label == ClassLabel::deceptive ? "deceptive" : "truthful";
}

ClassLabel parse_label(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "deceptive") return ClassLabel::deceptive;
  if (lowered == "truthful") return ClassLabel::truthful;
  throw std::invalid_argument("unknown class label: '" + std::string(text) + "'");
}

const ManifestRow* CorpusManifest::find(std::string_view clip_id) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), clip_id,
                             [](const ManifestRow& row, std::string_view id) {
                               return row.clip_id < id;
                             });
  if (it == rows.end() || it->clip_id != clip_id) return nullptr;
  return &*it;
}

void CorpusManifest::normalize() {
  std::sort(rows.begin(), rows.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.clip_id < b.clip_id; });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].n_frames == 0) {
      throw std::invalid_argument("manifest: clip '" + rows[i].clip_id + "' has n_frames = 0");
    }
    if (i > 0 && rows[i].clip_id == rows[i - 1].clip_id) {
      throw std::invalid_argument("manifest: duplicate clip_id '" + rows[i].clip_id + "'");
    }
  }
}

}  // namespace estkit
