#pragma once

// Independent reference implementations used only by tests. Each one checks
// a production routine through a different route (counting pairs, collapsing
// runs, full sorts), so the two sides cannot share a bug in the same place.

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "estkit/emotion.hpp"
#include "estkit/est.hpp"

namespace oracles {

// Majority vote among {current visual, next visual, aligned audio}; ties
// (all three distinct) go to the current visual state. Audio shorter than
// needed repeats its last element; empty audio returns the visual track.
inline std::vector<estkit::EmotionState> majority_revise(
    std::span<const estkit::EmotionState> visual,
    std::span<const estkit::EmotionState> audio) {
  const std::size_t n = visual.size();
  std::vector<estkit::EmotionState> out(visual.begin(), visual.end());
  if (audio.empty() || n == 0) return out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const estkit::EmotionState a = visual[i];
    const estkit::EmotionState b = visual[i + 1];
    const estkit::EmotionState c = audio[std::min(i, audio.size() - 1)];
    std::array<int, estkit::kNumEmotions> votes{};
    votes[static_cast<std::size_t>(a)] += 1;
    votes[static_cast<std::size_t>(b)] += 1;
    votes[static_cast<std::size_t>(c)] += 1;
    estkit::EmotionState winner = a;  // tie-break: current visual state
    for (int s = 0; s < estkit::kNumEmotions; ++s) {
      if (votes[static_cast<std::size_t>(s)] >= 2) {
        winner = static_cast<estkit::EmotionState>(s);
        break;
      }
    }
    out[i] = winner;
  }
  return out;
}

// Run-length route to the transition feature: collapse the track into
// maximal runs, count one (x,x) per run of length >= 2 and one (x,y) per
// boundary between consecutive runs, then normalize.
inline estkit::EstVector runlength_est(std::span<const estkit::EmotionState> states) {
  struct Run {
    estkit::EmotionState state;
    std::size_t length;
  };
  std::vector<Run> runs;
  for (estkit::EmotionState s : states) {
    if (!runs.empty() && runs.back().state == s) {
      runs.back().length += 1;
    } else {
      runs.push_back({s, 1});
    }
  }

  std::array<std::uint64_t, estkit::kEstDimension> counts{};
  std::uint64_t total = 0;
  for (const Run& run : runs) {
    if (run.length >= 2) {
      counts[estkit::transition_index(run.state, run.state)] += 1;
      total += 1;
    }
  }
  for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
    counts[estkit::transition_index(runs[r].state, runs[r + 1].state)] += 1;
    total += 1;
  }

  estkit::EstVector est;
  if (total == 0) {
    est.degenerate = true;
    return est;
  }
  for (std::size_t i = 0; i < estkit::kEstDimension; ++i) {
    est.values[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return est;
}

// Pairwise-counting route to ROC-AUC.
inline double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] != 1) continue;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != 0) continue;
      ++pairs;
      if (scores[p] > scores[q]) {
        wins += 1.0;
      } else if (scores[p] == scores[q]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

// Full-sort route to top-k selection: stable sort on descending score keeps
// ascending indices within ties.
inline std::vector<std::size_t> sorted_top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(k);
  return order;
}

}  // namespace oracles
