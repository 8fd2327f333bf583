#include "estkit/emotion.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "estkit/errors.hpp"

namespace estkit {

EmotionState parse_emotion(std::string_view label) {
  std::string lowered(label);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (int i = 0; i < kNumEmotions; ++i) {
    if (lowered == kEmotionNames[static_cast<std::size_t>(i)]) {
      return static_cast<EmotionState>(i);
    }
  }
  throw UnknownEmotionLabel(std::string(label));
}

std::string_view emotion_name(EmotionState state) {
  return kEmotionNames[static_cast<std::size_t>(state)];
}

std::vector<EmotionState> expand_audio(const EmotionTrack& audio, std::size_t factor) {
  if (audio.modality != Modality::audio) {
    throw std::invalid_argument("expand_audio: not an audio track");
  }
  if (factor == 0) {
    throw std::invalid_argument("expand_audio: factor must be positive");
  }
  std::vector<EmotionState> expanded;
  expanded.reserve(audio.states.size() * factor);
  for (EmotionState s : audio.states) {
    expanded.insert(expanded.end(), factor, s);
  }
  return expanded;
}

RevisedTrack revise(const EmotionTrack& visual, std::span<const EmotionState> expanded_audio) {
  if (visual.modality != Modality::visual) {
    throw std::invalid_argument("revise: not a visual track");
  }
  if (visual.states.empty()) {
    throw std::invalid_argument("revise: visual track is empty");
  }
  const auto& v = visual.states;
  const std::size_t n = v.size();
  RevisedTrack revised{visual.clip_id, {}};
  if (expanded_audio.empty()) {
    revised.states = v;
    return revised;
  }
  revised.states.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // Pad a short audio sequence by repeating its last element.
    const EmotionState audio_state = expanded_audio[std::min(i, expanded_audio.size() - 1)];
    revised.states[i] = (v[i + 1] == audio_state) ? v[i + 1] : v[i];
  }
  revised.states[n - 1] = v[n - 1];
  return revised;
}

}  // namespace estkit
