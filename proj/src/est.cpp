#include "estkit/est.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace estkit {

TransitionMatrix transition_counts(std::span<const EmotionState> states) {
  TransitionMatrix t;
  const std::size_t n = states.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    bool counted = false;
    if (states[k] != states[k + 1] || k == 0) {
      counted = true;
    } else if (states[k] != states[k - 1]) {
      // First equal pair of a run that starts after the first position.
      counted = true;
    }
    if (counted) {
      t.at(states[k], states[k + 1]) += 1;
      t.total += 1;
    }
  }
  return t;
}

EstVector est_from_counts(const TransitionMatrix& transitions) {
  EstVector est;
  if (transitions.total == 0) {
    est.degenerate = true;
    return est;
  }
  const double total = static_cast<double>(transitions.total);
  for (std::size_t i = 0; i < kEstDimension; ++i) {
    est.values[i] = static_cast<double>(transitions.counts[i]) / total;
  }
  return est;
}

EstVector est_feature(const RevisedTrack& revised) {
  if (revised.states.empty()) {
    throw std::invalid_argument("est_feature: track is empty");
  }
  return est_from_counts(transition_counts(revised.states));
}

std::array<double, kNumEmotions> emotion_distribution(std::span<const EmotionState> states) {
  if (states.empty()) {
    throw std::invalid_argument("emotion_distribution: track is empty");
  }
  std::array<double, kNumEmotions> distribution{};
  for (EmotionState s : states) {
    distribution[static_cast<std::size_t>(s)] += 1.0;
  }
  const double n = static_cast<double>(states.size());
  for (double& d : distribution) d /= n;
  return distribution;
}

std::vector<TransitionEntry> top_transitions(const EstVector& est, std::size_t count) {
  count = std::min(count, kEstDimension);
  std::array<std::size_t, kEstDimension> order{};
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (est.values[a] != est.values[b]) return est.values[a] > est.values[b];
    return a < b;
  });
  std::vector<TransitionEntry> top;
  top.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t idx = order[i];
    top.push_back({static_cast<EmotionState>(idx / kNumEmotions),
                   static_cast<EmotionState>(idx % kNumEmotions), est.values[idx]});
  }
  return top;
}

}  // namespace estkit
