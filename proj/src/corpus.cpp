#include "estkit/corpus.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

#include "estkit/errors.hpp"
#include "estkit/io.hpp"

namespace estkit {

namespace {

void require_fields(const std::vector<std::string>& fields, std::size_t expected,
                    const std::string& file, std::size_t line) {
  if (fields.size() != expected) {
    throw ParseError(file, line,
                     "expected " + std::to_string(expected) + " fields, got " +
                         std::to_string(fields.size()));
  }
}

// clip_id -> ordered (index, state) rows from a states file.
std::map<std::string, std::vector<EmotionState>> load_state_rows(
    const std::filesystem::path& path, std::string_view index_column) {
  io::CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw ParseError(reader.path(), reader.line(), "missing header row");
  }
  require_fields(fields, 3, reader.path(), reader.line());
  if (fields[0] != "clip_id" || fields[1] != index_column || fields[2] != "state") {
    throw ParseError(reader.path(), reader.line(),
                     "expected header clip_id," + std::string(index_column) + ",state");
  }

  std::map<std::string, std::vector<EmotionState>> tracks;
  while (reader.next(fields)) {
    require_fields(fields, 3, reader.path(), reader.line());
    const long long index = io::parse_int(fields[1], reader.path(), reader.line());
    EmotionState state;
    try {
      state = parse_emotion(fields[2]);
    } catch (const UnknownEmotionLabel& e) {
      throw ParseError(reader.path(), reader.line(), e.what());
    }
    auto& states = tracks[fields[0]];
    if (index != static_cast<long long>(states.size())) {
      throw ParseError(reader.path(), reader.line(),
                       "non-dense " + std::string(index_column) + " " + std::to_string(index) +
                           " for clip '" + fields[0] + "' (expected " +
                           std::to_string(states.size()) + ")");
    }
    states.push_back(state);
  }
  return tracks;
}

}  // namespace

CorpusManifest Corpus::manifest() const {
  CorpusManifest m;
  m.rows.reserve(clips.size());
  for (const CorpusClip& clip : clips) m.rows.push_back(clip.info);
  return m;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  io::CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw ParseError(reader.path(), reader.line(), "missing header row");
  }
  require_fields(fields, 5, reader.path(), reader.line());
  if (fields[0] != "clip_id" || fields[1] != "label" || fields[2] != "identity" ||
      fields[3] != "source_video" || fields[4] != "n_frames") {
    throw ParseError(reader.path(), reader.line(),
                     "expected header clip_id,label,identity,source_video,n_frames");
  }

  CorpusManifest manifest;
  while (reader.next(fields)) {
    require_fields(fields, 5, reader.path(), reader.line());
    ManifestRow row;
    row.clip_id = fields[0];
    try {
      row.label = parse_label(fields[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(reader.path(), reader.line(), e.what());
    }
    row.identity = fields[2];
    row.source_video = fields[3];
    const long long frames = io::parse_int(fields[4], reader.path(), reader.line());
    if (frames < 1) {
      throw ParseError(reader.path(), reader.line(), "n_frames must be at least 1");
    }
    row.n_frames = static_cast<std::size_t>(frames);
    manifest.rows.push_back(std::move(row));
  }
  try {
    manifest.normalize();
  } catch (const std::invalid_argument& e) {
    throw ParseError(reader.path(), 0, e.what());
  }
  return manifest;
}

Corpus load_corpus(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& visual_path,
                   const std::optional<std::filesystem::path>& audio_path,
                   const std::map<std::string, std::filesystem::path>& aux_paths) {
  const CorpusManifest manifest = load_manifest(manifest_path);
  auto visual = load_state_rows(visual_path, "frame_index");
  std::map<std::string, std::vector<EmotionState>> audio;
  if (audio_path) {
    audio = load_state_rows(*audio_path, "segment_index");
  }

  Corpus corpus;
  corpus.clips.reserve(manifest.rows.size());
  for (const ManifestRow& row : manifest.rows) {
    auto it = visual.find(row.clip_id);
    if (it == visual.end()) {
      throw MissingClip("visual states missing for clip '" + row.clip_id + "'");
    }
    if (it->second.size() != row.n_frames) {
      throw LengthMismatch("clip '" + row.clip_id + "': visual track has " +
                           std::to_string(it->second.size()) + " frames, manifest says " +
                           std::to_string(row.n_frames));
    }
    CorpusClip clip;
    clip.info = row;
    clip.visual = EmotionTrack{row.clip_id, Modality::visual, std::move(it->second),
                               kVisualFramesPerSecond};
    visual.erase(it);
    auto audio_it = audio.find(row.clip_id);
    if (audio_it != audio.end()) {
      clip.audio = EmotionTrack{row.clip_id, Modality::audio, std::move(audio_it->second),
                                kAudioSegmentsPerSecond};
      audio.erase(audio_it);
    }
    corpus.clips.push_back(std::move(clip));
  }
  if (!visual.empty()) {
    throw MissingClip("visual states contain clip '" + visual.begin()->first +
                      "' that is not in the manifest");
  }
  if (!audio.empty()) {
    throw MissingClip("audio states contain clip '" + audio.begin()->first +
                      "' that is not in the manifest");
  }

  for (const auto& [name, path] : aux_paths) {
    corpus.aux.emplace(name, load_feature_block(path, name, &manifest));
  }
  return corpus;
}

FeatureBlock load_feature_block(const std::filesystem::path& path, const std::string& name,
                                const CorpusManifest* manifest) {
  io::CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw ParseError(reader.path(), reader.line(), "missing header row");
  }
  if (fields.size() < 2 || fields[0] != "clip_id") {
    throw ParseError(reader.path(), reader.line(), "expected header clip_id,<name>_0,...");
  }
  const std::size_t dimension = fields.size() - 1;
  if (name == "est" && dimension != kEstDimension) {
    throw ParseError(reader.path(), reader.line(),
                     "est blocks are " + std::to_string(kEstDimension) + "-dimensional, got " +
                         std::to_string(dimension));
  }
  for (std::size_t j = 0; j < dimension; ++j) {
    const std::string expected = name + "_" + std::to_string(j);
    if (fields[j + 1] != expected) {
      throw ParseError(reader.path(), reader.line(),
                       "expected column '" + expected + "', got '" + fields[j + 1] + "'");
    }
  }

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  while (reader.next(fields)) {
    require_fields(fields, dimension + 1, reader.path(), reader.line());
    std::vector<double> values(dimension);
    for (std::size_t j = 0; j < dimension; ++j) {
      values[j] = io::parse_finite_double(fields[j + 1], reader.path(), reader.line());
    }
    rows.emplace_back(fields[0], std::move(values));
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw ParseError(reader.path(), 0, "duplicate clip_id '" + rows[i].first + "'");
    }
  }

  FeatureBlock block;
  block.name = name;
  block.dimension = dimension;
  block.clip_ids.reserve(rows.size());
  block.values.reserve(rows.size() * dimension);
  for (auto& [clip_id, values] : rows) {
    block.clip_ids.push_back(std::move(clip_id));
    block.values.insert(block.values.end(), values.begin(), values.end());
  }

  if (manifest != nullptr) {
    for (const ManifestRow& row : manifest->rows) {
      if (block.index_of(row.clip_id) == static_cast<std::size_t>(-1)) {
        throw MissingClip("block '" + name + "' lacks clip '" + row.clip_id + "'");
      }
    }
    for (const std::string& id : block.clip_ids) {
      if (manifest->find(id) == nullptr) {
        throw MissingClip("block '" + name + "' has clip '" + id + "' that is not in the manifest");
      }
    }
  }
  return block;
}

std::vector<FeatureRecord> load_fused(const std::filesystem::path& path) {
  io::CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw ParseError(reader.path(), reader.line(), "missing header row");
  }
  if (fields.size() < 3 || fields[0] != "clip_id" || fields[1] != "label") {
    throw ParseError(reader.path(), reader.line(), "expected header clip_id,label,f_0,...");
  }
  const std::size_t dimension = fields.size() - 2;
  for (std::size_t j = 0; j < dimension; ++j) {
    const std::string expected = "f_" + std::to_string(j);
    if (fields[j + 2] != expected) {
      throw ParseError(reader.path(), reader.line(),
                       "expected column '" + expected + "', got '" + fields[j + 2] + "'");
    }
  }
  std::vector<FeatureRecord> records;
  while (reader.next(fields)) {
    require_fields(fields, dimension + 2, reader.path(), reader.line());
    FeatureRecord record;
    record.clip_id = fields[0];
    const long long label = io::parse_int(fields[1], reader.path(), reader.line());
    if (label != 0 && label != 1) {
      throw ParseError(reader.path(), reader.line(), "label must be 0 or 1");
    }
    record.label = static_cast<ClassLabel>(label);
    record.identity = record.clip_id;  // fused files carry no identity column
    record.features.resize(dimension);
    for (std::size_t j = 0; j < dimension; ++j) {
      record.features[j] = io::parse_finite_double(fields[j + 2], reader.path(), reader.line());
    }
    records.push_back(std::move(record));
  }
  std::sort(records.begin(), records.end(),
            [](const FeatureRecord& a, const FeatureRecord& b) { return a.clip_id < b.clip_id; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].clip_id == records[i - 1].clip_id) {
      throw ParseError(reader.path(), 0, "duplicate clip_id '" + records[i].clip_id + "'");
    }
  }
  return records;
}

namespace {

std::string provenance_line(std::string_view provenance) {
  if (provenance.empty()) return {};
  return "# " + std::string(provenance) + "\n";
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest,
                    std::string_view provenance) {
  std::string out = provenance_line(provenance);
  out += "clip_id,label,identity,source_video,n_frames\n";
  for (const ManifestRow& row : manifest.rows) {
    out += row.clip_id + ',' + std::string(label_name(row.label)) + ',' + row.identity + ',' +
           row.source_video + ',' + std::to_string(row.n_frames) + '\n';
  }
  io::write_file_atomic(path, out);
}

void write_states(const std::filesystem::path& path, const Corpus& corpus, Modality modality,
                  std::string_view provenance) {
  std::string out = provenance_line(provenance);
  out += modality == Modality::visual ? "clip_id,frame_index,state\n"
                                      : "clip_id,segment_index,state\n";
  for (const CorpusClip& clip : corpus.clips) {
    const std::vector<EmotionState>* states = nullptr;
    if (modality == Modality::visual) {
      states = &clip.visual.states;
    } else if (clip.audio) {
      states = &clip.audio->states;
    }
    if (states == nullptr) continue;
    for (std::size_t i = 0; i < states->size(); ++i) {
      out += clip.info.clip_id + ',' + std::to_string(i) + ',' +
             std::string(emotion_name((*states)[i])) + '\n';
    }
  }
  io::write_file_atomic(path, out);
}

void write_feature_block(const std::filesystem::path& path, const FeatureBlock& block,
                         std::string_view provenance) {
  block.validate();
  std::string out = provenance_line(provenance);
  out += "clip_id";
  for (std::size_t j = 0; j < block.dimension; ++j) {
    out += ',' + block.name + '_' + std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < block.clip_ids.size(); ++i) {
    out += block.clip_ids[i];
    for (double v : block.row(i)) {
      out += ',' + io::format_double(v);
    }
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void write_fused(const std::filesystem::path& path, std::span<const FeatureRecord> records,
                 std::string_view provenance) {
  const std::size_t dimension = records.empty() ? 0 : records.front().features.size();
  std::string out = provenance_line(provenance);
  out += "clip_id,label";
  for (std::size_t j = 0; j < dimension; ++j) {
    out += ",f_" + std::to_string(j);
  }
  out += '\n';
  for (const FeatureRecord& record : records) {
    if (record.features.size() != dimension) {
      throw DimensionMismatch("fused record '" + record.clip_id + "' has ragged dimension");
    }
    out += record.clip_id + ',' + std::to_string(static_cast<int>(record.label));
    for (double v : record.features) {
      out += ',' + io::format_double(v);
    }
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void write_mask_json(const std::filesystem::path& path, const SelectionMask& mask,
                     std::string_view score_kind, std::string_view config_hash) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  if (!config_hash.empty()) doc["config_hash"] = std::string(config_hash);
  doc["score"] = std::string(score_kind);
  doc["k"] = mask.kept_indices.size();
  doc["dimension"] = mask.scores.size();
  doc["mask_hash"] = io::hex64(mask.hash());
  const auto ascending = mask.ascending();
  doc["kept_indices"] = ascending;
  nlohmann::ordered_json kept_scores = nlohmann::ordered_json::array();
  for (std::size_t idx : ascending) kept_scores.push_back(mask.scores[idx]);
  doc["kept_scores"] = std::move(kept_scores);
  io::write_file_atomic(path, doc.dump(2) + "\n");
}

RevisedTrack revise_clip(const CorpusClip& clip) {
  if (!clip.audio) {
    return revise(clip.visual, {});
  }
  const std::vector<EmotionState> expanded = expand_audio(*clip.audio);
  return revise(clip.visual, expanded);
}

AggregateReport aggregate_report(const Corpus& corpus) {
  AggregateReport report;
  std::array<std::uint64_t, kNumEmotions> pooled_states_d{}, pooled_states_t{};
  std::array<std::uint64_t, kEstDimension> pooled_counts_d{}, pooled_counts_t{};
  std::uint64_t frames_d = 0, frames_t = 0, transitions_d = 0, transitions_t = 0;

  for (const CorpusClip& clip : corpus.clips) {
    const bool deceptive = clip.info.label == ClassLabel::deceptive;
    ClassAggregate& agg = deceptive ? report.deceptive : report.truthful;
    auto& pooled_states = deceptive ? pooled_states_d : pooled_states_t;
    auto& pooled_counts = deceptive ? pooled_counts_d : pooled_counts_t;
    auto& frames = deceptive ? frames_d : frames_t;
    auto& transitions = deceptive ? transitions_d : transitions_t;

    const RevisedTrack revised = revise_clip(clip);
    agg.n_clips += 1;
    const auto distribution = emotion_distribution(revised.states);
    for (int s = 0; s < kNumEmotions; ++s) {
      agg.mean_distribution[static_cast<std::size_t>(s)] +=
          distribution[static_cast<std::size_t>(s)];
    }
    for (EmotionState s : revised.states) {
      pooled_states[static_cast<std::size_t>(s)] += 1;
    }
    frames += revised.states.size();

    const TransitionMatrix counts = transition_counts(revised.states);
    const EstVector est = est_from_counts(counts);
    if (!est.degenerate) {
      agg.est_clips += 1;
      for (std::size_t i = 0; i < kEstDimension; ++i) agg.mean_est[i] += est.values[i];
    }
    for (std::size_t i = 0; i < kEstDimension; ++i) pooled_counts[i] += counts.counts[i];
    transitions += counts.total;
  }

  for (ClassAggregate* agg : {&report.deceptive, &report.truthful}) {
    if (agg->n_clips > 0) {
      for (double& v : agg->mean_distribution) v /= static_cast<double>(agg->n_clips);
    }
    if (agg->est_clips > 0) {
      for (double& v : agg->mean_est) v /= static_cast<double>(agg->est_clips);
    }
  }
  for (int s = 0; s < kNumEmotions; ++s) {
    const auto i = static_cast<std::size_t>(s);
    if (frames_d > 0) {
      report.deceptive.pooled_distribution[i] =
          static_cast<double>(pooled_states_d[i]) / static_cast<double>(frames_d);
    }
    if (frames_t > 0) {
      report.truthful.pooled_distribution[i] =
          static_cast<double>(pooled_states_t[i]) / static_cast<double>(frames_t);
    }
  }
  for (std::size_t i = 0; i < kEstDimension; ++i) {
    if (transitions_d > 0) {
      report.deceptive.pooled_est[i] =
          static_cast<double>(pooled_counts_d[i]) / static_cast<double>(transitions_d);
    }
    if (transitions_t > 0) {
      report.truthful.pooled_est[i] =
          static_cast<double>(pooled_counts_t[i]) / static_cast<double>(transitions_t);
    }
  }
  return report;
}

std::string aggregate_to_csv(const AggregateReport& report) {
  std::string out = "class,metric,aggregation,from_state,to_state,value\n";
  const auto emit_class = [&out](std::string_view cls, const ClassAggregate& agg) {
    for (int s = 0; s < kNumEmotions; ++s) {
      const auto i = static_cast<std::size_t>(s);
      out += std::string(cls) + ",distribution,per_clip_mean," +
             std::string(kEmotionNames[i]) + ",," + io::format_double(agg.mean_distribution[i]) +
             '\n';
    }
    for (int s = 0; s < kNumEmotions; ++s) {
      const auto i = static_cast<std::size_t>(s);
      out += std::string(cls) + ",distribution,pooled," + std::string(kEmotionNames[i]) + ",," +
             io::format_double(agg.pooled_distribution[i]) + '\n';
    }
    for (std::size_t i = 0; i < kEstDimension; ++i) {
      out += std::string(cls) + ",est,per_clip_mean," +
             std::string(kEmotionNames[i / kNumEmotions]) + ',' +
             std::string(kEmotionNames[i % kNumEmotions]) + ',' +
             io::format_double(agg.mean_est[i]) + '\n';
    }
    for (std::size_t i = 0; i < kEstDimension; ++i) {
      out += std::string(cls) + ",est,pooled," + std::string(kEmotionNames[i / kNumEmotions]) +
             ',' + std::string(kEmotionNames[i % kNumEmotions]) + ',' +
             io::format_double(agg.pooled_est[i]) + '\n';
    }
  };
  emit_class("deceptive", report.deceptive);
  emit_class("truthful", report.truthful);
  return out;
}

}  // namespace estkit
