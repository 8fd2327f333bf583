#pragma once

#include <array>
#include <filesystem>
#include <string_view>

#include "estkit/corpus.hpp"

namespace estkit {

using EmotionChain = std::array<std::array<double, kNumEmotions>, kNumEmotions>;

/// Class-conditional chains used when no custom chain is supplied. Each is
/// built by placing the five dominant transition masses of its class on the
/// matrix, spreading each row's remaining mass uniformly over all seven
/// targets, and renormalizing. They are an inspiration for plausible class
/// structure, not a fitted generative model.
EmotionChain default_deceptive_chain();
EmotionChain default_truthful_chain();

/// Throws InvalidChain unless every row is a probability vector (sums to 1
/// within 1e-9, entries non-negative).
void validate_chain(const EmotionChain& chain);

struct SynthConfig {
  std::size_t clips_per_class = 100;
  std::size_t frames_min = 150;
  std::size_t frames_max = 1500;
  EmotionChain deceptive_chain = default_deceptive_chain();
  EmotionChain truthful_chain = default_truthful_chain();
  std::array<double, kNumEmotions> deceptive_initial{1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7,
                                                     1.0 / 7, 1.0 / 7, 1.0 / 7};
  std::array<double, kNumEmotions> truthful_initial{1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7,
                                                    1.0 / 7, 1.0 / 7, 1.0 / 7};
  /// Blends each class chain toward their common mean: 1 keeps the class
  /// chains, 0 collapses both classes onto one shared chain.
  double separation = 1.0;
  /// Probability that a derived audio segment label is replaced by a
  /// uniformly random different state.
  double audio_noise = 0.1;
  std::uint64_t seed = 0;
};

/// Generates the corpus in memory. Deterministic in config.seed; each clip
/// draws from its own derived seed. Visual tracks roll the class chain;
/// audio segment labels are the majority state of each 15-frame window
/// (ties to the lowest state index), then corrupted with probability
/// audio_noise. Identities are assigned round-robin over an odd identity
/// count so every identity spans both classes.
Corpus generate_corpus(const SynthConfig& config);

/// generate_corpus + write manifest/visual/audio CSVs into out_dir.
/// Same seed, same files, byte for byte.
Corpus synth_corpus(const SynthConfig& config, const std::filesystem::path& out_dir,
                    std::string_view provenance = {});

}  // namespace estkit
