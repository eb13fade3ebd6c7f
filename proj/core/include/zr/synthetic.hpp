// core/include/zr/synthetic.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic word corpus for desk-scale experiments: each word type is
// a smooth random trajectory; tokens are monotone time-warps of it, pushed
// through a per-speaker affine map, plus white noise and optional impulsive
// single-dimension artifacts. One token per utterance.

#ifndef ZR_SYNTHETIC_HPP
#define ZR_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "zr/features.hpp"
#include "zr/pairing.hpp"
#include "zr/segments.hpp"

namespace zr {

struct SyntheticConfig {
  int n_types = 7;
  int n_speakers = 6;
  int n_eval_speakers = 1;  // held out: no training pairs, used for eval lists
  int words_per_speaker_per_type = 3;
  int frames_min = 20;
  int frames_max = 30;
  int dim = 39;
  double speaker_distortion = 0.5;  // affine scale in [1-d, 1+d], offset in [-d, d]
  double noise_sigma = 0.3;
  double warp_jitter = 0.5;  // 0 disables time warping
  double spike_rate = 0.0;   // per-frame chance of an impulsive channel artifact
  double spike_scale = 8.0;  // artifact magnitude, uniform in +-[scale, 2*scale]
  int spike_dims = 0;        // artifacts hit the first k dims only; 0 = any dim
  double pair_corruption = 0.0;  // exact fraction of wrong-type pairs
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<FeatureSequence> features;  // one utterance per word token
  SpeakerMap speakers;
  std::vector<LabeledWord> words;        // all tokens with gold type labels
  std::vector<bool> is_eval;             // per word: held-out speaker?
  std::vector<DiscoveredPair> pairs;     // training pairs over non-eval words
  std::vector<std::string> triphones;    // per word: "a-<type>-b" label
};

// Deterministic for a given config. Throws DataError on degenerate configs
// (fewer than 2 types, no speakers, empty frame range, ...).
SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config);

}  // namespace zr

#endif  // ZR_SYNTHETIC_HPP
