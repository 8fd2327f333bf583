#include "estkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "estkit/errors.hpp"
#include "estkit/rng.hpp"

namespace estkit {

namespace {

EmotionChain chain_from_top_masses(
    std::initializer_list<std::tuple<EmotionState, EmotionState, double>> masses) {
  EmotionChain chain{};
  for (const auto& [from, to, mass] : masses) {
    chain[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)] = mass;
  }
  for (auto& row : chain) {
    double placed = 0.0;
    for (double v : row) placed += v;
    const double fill = (1.0 - placed) / kNumEmotions;
    double sum = 0.0;
    for (double& v : row) {
      v += fill;
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  return chain;
}

}  // namespace

EmotionChain default_deceptive_chain() {
  using E = EmotionState;
  return chain_from_top_masses({
      {E::Sad, E::Fear, 0.43},
      {E::Neutral, E::Sad, 0.18},
      {E::Happy, E::Neutral, 0.10},
      {E::Fear, E::Angry, 0.08},
      {E::Neutral, E::Neutral, 0.05},
  });
}

EmotionChain default_truthful_chain() {
  using E = EmotionState;
  return chain_from_top_masses({
      {E::Fear, E::Angry, 0.36},
      {E::Neutral, E::Neutral, 0.15},
      {E::Neutral, E::Happy, 0.13},
      {E::Fear, E::Neutral, 0.09},
      {E::Sad, E::Angry, 0.08},
  });
}

void validate_chain(const EmotionChain& chain) {
  for (std::size_t r = 0; r < kNumEmotions; ++r) {
    double sum = 0.0;
    for (double v : chain[r]) {
      if (v < 0.0) {
        throw InvalidChain("chain row " + std::to_string(r) + " has a negative entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidChain("chain row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

namespace {

EmotionChain blend_chain(const EmotionChain& chain, const EmotionChain& mid, double separation) {
  EmotionChain out{};
  for (std::size_t r = 0; r < kNumEmotions; ++r) {
    for (std::size_t c = 0; c < kNumEmotions; ++c) {
      out[r][c] = separation * chain[r][c] + (1.0 - separation) * mid[r][c];
    }
  }
  return out;
}

std::string zero_padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, value);
  return buf;
}

EmotionState majority_state(std::span<const EmotionState> window) {
  std::array<std::size_t, kNumEmotions> counts{};
  for (EmotionState s : window) counts[static_cast<std::size_t>(s)] += 1;
  std::size_t best = 0;
  for (std::size_t s = 1; s < kNumEmotions; ++s) {
    if (counts[s] > counts[best]) best = s;  // ties keep the lowest index
  }
  return static_cast<EmotionState>(best);
}

}  // namespace

Corpus generate_corpus(const SynthConfig& config) {
  if (config.clips_per_class == 0) {
    throw std::invalid_argument("synth: clips_per_class must be positive");
  }
  if (config.frames_min == 0 || config.frames_min > config.frames_max) {
    throw std::invalid_argument("synth: need 1 <= frames_min <= frames_max");
  }
  if (config.separation < 0.0 || config.separation > 1.0) {
    throw std::invalid_argument("synth: separation must be in [0, 1]");
  }
  if (config.audio_noise < 0.0 || config.audio_noise > 1.0) {
    throw std::invalid_argument("synth: audio_noise must be in [0, 1]");
  }
  validate_chain(config.deceptive_chain);
  validate_chain(config.truthful_chain);
  for (const auto& initial : {config.deceptive_initial, config.truthful_initial}) {
    double sum = 0.0;
    for (double v : initial) {
      if (v < 0.0) throw std::invalid_argument("synth: initial distribution has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("synth: initial distribution must sum to 1");
    }
  }

  EmotionChain mid{};
  for (std::size_t r = 0; r < kNumEmotions; ++r) {
    for (std::size_t c = 0; c < kNumEmotions; ++c) {
      mid[r][c] = 0.5 * (config.deceptive_chain[r][c] + config.truthful_chain[r][c]);
    }
  }
  const EmotionChain chains[2] = {
      blend_chain(config.truthful_chain, mid, config.separation),
      blend_chain(config.deceptive_chain, mid, config.separation),
  };
  const std::array<double, kNumEmotions> initials[2] = {config.truthful_initial,
                                                        config.deceptive_initial};

  const std::size_t total = 2 * config.clips_per_class;
  // Odd identity count so consecutive (alternating-class) clips wrap onto
  // the same identity with both labels.
  std::size_t n_identities = std::max<std::size_t>(1, total / 3);
  if (n_identities % 2 == 0) n_identities += 1;

  Corpus corpus;
  corpus.clips.reserve(total);
  for (std::size_t g = 0; g < total; ++g) {
    const bool deceptive = g % 2 == 0;
    Rng rng(derive_seed(config.seed, {g}));

    CorpusClip clip;
    clip.info.clip_id = "clip_" + zero_padded(g, 5);
    clip.info.label = deceptive ? ClassLabel::deceptive : ClassLabel::truthful;
    clip.info.identity = "spk_" + zero_padded(g % n_identities, 3);
    clip.info.source_video = "synthetic";
    clip.info.n_frames =
        config.frames_min + rng.below(config.frames_max - config.frames_min + 1);

    const EmotionChain& chain = chains[deceptive ? 1 : 0];
    const auto& initial = initials[deceptive ? 1 : 0];
    std::vector<EmotionState> frames(clip.info.n_frames);
    frames[0] = static_cast<EmotionState>(rng.categorical(initial));
    for (std::size_t i = 1; i < frames.size(); ++i) {
      const auto row = chain[static_cast<std::size_t>(frames[i - 1])];
      frames[i] = static_cast<EmotionState>(rng.categorical(row));
    }
    clip.visual = EmotionTrack{clip.info.clip_id, Modality::visual, std::move(frames),
                               kVisualFramesPerSecond};

    const std::size_t n = clip.visual.states.size();
    const std::size_t segments = (n + kAudioExpansionFactor - 1) / kAudioExpansionFactor;
    std::vector<EmotionState> audio(segments);
    for (std::size_t s = 0; s < segments; ++s) {
      const std::size_t begin = s * kAudioExpansionFactor;
      const std::size_t end = std::min(begin + kAudioExpansionFactor, n);
      EmotionState state = majority_state(
          std::span<const EmotionState>(clip.visual.states.data() + begin, end - begin));
      if (config.audio_noise > 0.0 && rng.unit() < config.audio_noise) {
        // Replace with a uniformly random *different* state.
        auto other = static_cast<std::size_t>(rng.below(kNumEmotions - 1));
        if (other >= static_cast<std::size_t>(state)) ++other;
        state = static_cast<EmotionState>(other);
      }
      audio[s] = state;
    }
    clip.audio = EmotionTrack{clip.info.clip_id, Modality::audio, std::move(audio),
                              kAudioSegmentsPerSecond};
    corpus.clips.push_back(std::move(clip));
  }

  std::sort(corpus.clips.begin(), corpus.clips.end(), [](const CorpusClip& a, const CorpusClip& b) {
    return a.info.clip_id < b.info.clip_id;
  });
  return corpus;
}

Corpus synth_corpus(const SynthConfig& config, const std::filesystem::path& out_dir,
                    std::string_view provenance) {
  Corpus corpus = generate_corpus(config);
  std::filesystem::create_directories(out_dir);
  write_manifest(out_dir / "manifest.csv", corpus.manifest(), provenance);
  write_states(out_dir / "visual_states.csv", corpus, Modality::visual, provenance);
  write_states(out_dir / "audio_states.csv", corpus, Modality::audio, provenance);
  return corpus;
}

}  // namespace estkit
