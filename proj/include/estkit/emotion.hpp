#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace estkit {

/// The seven universal emotional states. The index order below is a
/// repository-wide constant: every transition matrix, feature vector and
/// file format indexes emotions in exactly this order.
enum class EmotionState : int {
  Angry = 0,
  Disgust = 1,
  Fear = 2,
  Happy = 3,
  Sad = 4,
  Surprise = 5,
  Neutral = 6,
};

inline constexpr int kNumEmotions = 7;

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "angry", "disgust", "fear", "happy", "sad", "surprise", "neutral"};

/// Case-insensitive parse of one of the seven canonical names.
/// No aliases ("anger" is rejected). Throws UnknownEmotionLabel otherwise.
EmotionState parse_emotion(std::string_view label);

std::string_view emotion_name(EmotionState state);

constexpr int emotion_index(EmotionState state) { return static_cast<int>(state); }

enum class Modality { visual, audio };

inline constexpr double kVisualFramesPerSecond = 30.0;
inline constexpr double kAudioSegmentsPerSecond = 2.0;

/// One 0.5 s audio segment spans 15 frames at 30 fps.
inline constexpr std::size_t kAudioExpansionFactor = 15;

/// A per-frame (visual) or per-segment (audio) emotion sequence for one clip.
struct EmotionTrack {
  std::string clip_id;
  Modality modality = Modality::visual;
  std::vector<EmotionState> states;
  double rate = kVisualFramesPerSecond;  // samples per second
};

/// Frame-level emotion sequence after cross-modal revision; same length as
/// the source visual track.
struct RevisedTrack {
  std::string clip_id;
  std::vector<EmotionState> states;
};

/// Repeats each audio segment state `factor` times so segment j covers
/// output positions [j*factor, (j+1)*factor).
std::vector<EmotionState> expand_audio(const EmotionTrack& audio,
                                       std::size_t factor = kAudioExpansionFactor);

/// Votes between the current visual state, the next visual state and the
/// aligned audio state at each frame: the next visual state wins when the
/// audio agrees with it, otherwise the current visual state stands. The last
/// frame always keeps its visual state.
///
/// An expanded audio sequence shorter than needed is padded by repeating its
/// last element; an empty one leaves the visual track unchanged.
RevisedTrack revise(const EmotionTrack& visual, std::span<const EmotionState> expanded_audio);

}  // namespace estkit
