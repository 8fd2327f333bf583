#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "estkit/emotion.hpp"

namespace estkit {

/// 7x7 = 49 transition categories, flattened from-state major:
/// feature index = 7 * from + to. This layout is a file-format constant.
inline constexpr std::size_t kEstDimension = 49;

constexpr std::size_t transition_index(EmotionState from, EmotionState to) {
  return static_cast<std::size_t>(from) * kNumEmotions + static_cast<std::size_t>(to);
}

struct TransitionMatrix {
  std::array<std::uint64_t, kEstDimension> counts{};
  std::uint64_t total = 0;

  std::uint64_t& at(EmotionState from, EmotionState to) {
    return counts[transition_index(from, to)];
  }
  std::uint64_t at(EmotionState from, EmotionState to) const {
    return counts[transition_index(from, to)];
  }
};

/// Normalized transition-frequency feature. For a non-degenerate track the
/// 49 values form a probability vector; a track with no countable transition
/// (single frame) yields the flagged all-zero vector.
struct EstVector {
  std::array<double, kEstDimension> values{};
  bool degenerate = false;
};

/// Counts emotion transitions over adjacent positions. A change of state is
/// always counted; a run of the same state is counted as a single
/// self-transition no matter how long it lasts.
TransitionMatrix transition_counts(std::span<const EmotionState> states);

EstVector est_from_counts(const TransitionMatrix& transitions);

EstVector est_feature(const RevisedTrack& revised);

/// Fraction of positions holding each of the 7 states. The track must be
/// non-empty.
std::array<double, kNumEmotions> emotion_distribution(std::span<const EmotionState> states);

struct TransitionEntry {
  EmotionState from;
  EmotionState to;
  double value;
};

/// The `count` largest feature entries, descending, ties broken by ascending
/// feature index. `count` is clamped to 49.
std::vector<TransitionEntry> top_transitions(const EstVector& est, std::size_t count);

}  // namespace estkit
