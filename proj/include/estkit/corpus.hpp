#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "estkit/emotion.hpp"
#include "estkit/est.hpp"
#include "estkit/fusion.hpp"
#include "estkit/manifest.hpp"

// Plain-CSV corpus interchange. All files are UTF-8 with LF line endings,
// a header row, rows sorted by clip_id, and full round-trip precision on
// numeric values. Lines starting with '#' are provenance comments and are
// ignored by the readers.
//
//   manifest.csv       clip_id,label,identity,source_video,n_frames
//   visual_states.csv  clip_id,frame_index,state      (dense, 0-based)
//   audio_states.csv   clip_id,segment_index,state    (dense, 0-based)
//   aux block          clip_id,<name>_0,...,<name>_{d-1}
//   fused features     clip_id,label,f_0,...,f_{D-1}

namespace estkit {

struct CorpusClip {
  ManifestRow info;
  EmotionTrack visual;
  std::optional<EmotionTrack> audio;
};

struct Corpus {
  std::vector<CorpusClip> clips;  // sorted by clip_id
  std::map<std::string, FeatureBlock> aux;

  CorpusManifest manifest() const;
};

CorpusManifest load_manifest(const std::filesystem::path& path);

/// Loads manifest + state files + aux blocks, validating that every manifest
/// clip has a visual track of exactly n_frames states. Audio is optional,
/// both per file and per clip.
Corpus load_corpus(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& visual_path,
                   const std::optional<std::filesystem::path>& audio_path = std::nullopt,
                   const std::map<std::string, std::filesystem::path>& aux_paths = {});

FeatureBlock load_feature_block(const std::filesystem::path& path, const std::string& name,
                                const CorpusManifest* manifest = nullptr);

std::vector<FeatureRecord> load_fused(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest,
                    std::string_view provenance = {});
void write_states(const std::filesystem::path& path, const Corpus& corpus, Modality modality,
                  std::string_view provenance = {});
void write_feature_block(const std::filesystem::path& path, const FeatureBlock& block,
                         std::string_view provenance = {});
void write_fused(const std::filesystem::path& path, std::span<const FeatureRecord> records,
                 std::string_view provenance = {});
void write_mask_json(const std::filesystem::path& path, const SelectionMask& mask,
                     std::string_view score_kind, std::string_view config_hash = {});

/// Audio expansion + cross-modal revision for one clip; clips without audio
/// fall back to the visual track.
RevisedTrack revise_clip(const CorpusClip& clip);

struct ClassAggregate {
  std::size_t n_clips = 0;
  /// Mean of the per-clip emotion distributions (revised tracks).
  std::array<double, kNumEmotions> mean_distribution{};
  /// Pooled state counts over all frames / total frames.
  std::array<double, kNumEmotions> pooled_distribution{};
  /// Mean of per-clip EST vectors over non-degenerate clips.
  std::array<double, kEstDimension> mean_est{};
  std::size_t est_clips = 0;
  /// Summed transition counts / summed transition totals.
  std::array<double, kEstDimension> pooled_est{};
};

struct AggregateReport {
  ClassAggregate deceptive;
  ClassAggregate truthful;
};

/// Per-class emotion-distribution and EST aggregates, each reported both as
/// a per-clip mean and as a pooled-count ratio (the two are labeled in the
/// CSV because they answer different questions).
AggregateReport aggregate_report(const Corpus& corpus);

std::string aggregate_to_csv(const AggregateReport& report);

}  // namespace estkit
