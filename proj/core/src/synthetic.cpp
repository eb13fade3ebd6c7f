// core/src/synthetic.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zr/rng.hpp"

namespace zr {

namespace {

// Smooth prototype trajectory: per dimension, a small sum of random
// sinusoids over normalized time.
RowMatrixD make_prototype(int length, int dim, Rng& rng) {
  constexpr int kComponents = 3;
  RowMatrixD proto(length, dim);
  for (int d = 0; d < dim; ++d) {
    double amp[kComponents], freq[kComponents], phase[kComponents];
    for (int k = 0; k < kComponents; ++k) {
      amp[k] = rng.gaussian() / std::sqrt(static_cast<double>(kComponents));
      freq[k] = rng.uniform(0.5, 2.5);
      phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    for (int t = 0; t < length; ++t) {
      const double u = (t + 0.5) / static_cast<double>(length);
      double v = 0.0;
      for (int k = 0; k < kComponents; ++k) {
        v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * u + phase[k]);
      }
      proto(t, d) = v;
    }
  }
  return proto;
}

// Monotone resampling positions in [0, source_len - 1], endpoints pinned.
std::vector<double> warp_positions(int target_len, int source_len,
                                   double jitter, Rng& rng) {
  std::vector<double> pos(target_len);
  if (target_len == 1) {
    pos[0] = 0.0;
    return pos;
  }
  std::vector<double> cum(target_len, 0.0);
  for (int i = 1; i < target_len; ++i) {
    cum[i] = cum[i - 1] + rng.uniform(1.0 - jitter, 1.0 + jitter);
  }
  const double total = cum.back();
  for (int i = 0; i < target_len; ++i) {
    pos[i] = cum[i] / total * (source_len - 1);
  }
  return pos;
}

RowMatrixD interpolate_rows(const RowMatrixD& src,
                            const std::vector<double>& positions) {
  const int dim = static_cast<int>(src.cols());
  RowMatrixD out(static_cast<int>(positions.size()), dim);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double p = positions[i];
    const int lo = std::min(static_cast<int>(p),
                            static_cast<int>(src.rows()) - 1);
    const int hi = std::min(lo + 1, static_cast<int>(src.rows()) - 1);
    const double frac = p - lo;
    out.row(i) = (1.0 - frac) * src.row(lo) + frac * src.row(hi);
  }
  return out;
}

std::string two_digits(int n) {
  std::string s = std::to_string(n);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config) {
  if (config.n_types < 2) throw DataError("synthetic corpus needs >= 2 types");
  if (config.n_speakers < 1) {
    throw DataError("synthetic corpus needs >= 1 speaker");
  }
  if (config.n_eval_speakers < 0 ||
      config.n_eval_speakers >= config.n_speakers) {
    throw DataError("eval speaker count must be in [0, n_speakers)");
  }
  if (config.words_per_speaker_per_type < 1) {
    throw DataError("need >= 1 word per speaker per type");
  }
  if (config.frames_min < 2 || config.frames_max < config.frames_min) {
    throw DataError("invalid frame range");
  }
  if (config.dim < 1) throw DataError("invalid dimension");
  if (config.warp_jitter < 0.0 || config.warp_jitter >= 1.0) {
    throw DataError("warp jitter must be in [0, 1)");
  }
  if (config.spike_rate < 0.0 || config.spike_rate > 1.0) {
    throw DataError("spike rate must be in [0, 1]");
  }
  if (config.spike_dims < 0 || config.spike_dims > config.dim) {
    throw DataError("spike dims must be in [0, dim]");
  }
  if (config.pair_corruption < 0.0 || config.pair_corruption > 1.0) {
    throw DataError("pair corruption must be in [0, 1]");
  }

  Rng proto_rng(derive_seed(config.seed, 1));
  Rng speaker_rng(derive_seed(config.seed, 2));
  Rng token_rng(derive_seed(config.seed, 3));
  Rng pair_rng(derive_seed(config.seed, 4));

  // Prototypes.
  std::vector<RowMatrixD> prototypes;
  std::vector<int> proto_len(config.n_types);
  for (int t = 0; t < config.n_types; ++t) {
    proto_len[t] = config.frames_min +
                   static_cast<int>(proto_rng.below(
                       config.frames_max - config.frames_min + 1));
    prototypes.push_back(make_prototype(proto_len[t], config.dim, proto_rng));
  }

  // Per-speaker affine maps.
  const double delta = config.speaker_distortion;
  std::vector<Eigen::VectorXd> scale(config.n_speakers);
  std::vector<Eigen::VectorXd> offset(config.n_speakers);
  for (int s = 0; s < config.n_speakers; ++s) {
    scale[s].resize(config.dim);
    offset[s].resize(config.dim);
    for (int d = 0; d < config.dim; ++d) {
      scale[s][d] = speaker_rng.uniform(1.0 - delta, 1.0 + delta);
      offset[s][d] = speaker_rng.uniform(-delta, delta);
    }
  }

  SyntheticCorpus corpus;
  const int first_eval_speaker = config.n_speakers - config.n_eval_speakers;

  for (int s = 0; s < config.n_speakers; ++s) {
    const std::string speaker_id = "spk" + two_digits(s);
    for (int t = 0; t < config.n_types; ++t) {
      for (int k = 0; k < config.words_per_speaker_per_type; ++k) {
        const int length =
            config.frames_min +
            static_cast<int>(token_rng.below(
                config.frames_max - config.frames_min + 1));
        RowMatrixD token =
            config.warp_jitter == 0.0 && length == proto_len[t]
                ? prototypes[t]
                : interpolate_rows(prototypes[t],
                                   warp_positions(length, proto_len[t],
                                                  config.warp_jitter,
                                                  token_rng));
        for (int i = 0; i < token.rows(); ++i) {
          for (int d = 0; d < config.dim; ++d) {
            token(i, d) = token(i, d) * scale[s][d] + offset[s][d] +
                          config.noise_sigma * token_rng.gaussian();
          }
          if (config.spike_rate > 0.0 &&
              token_rng.uniform01() < config.spike_rate) {
            const int span =
                config.spike_dims > 0 ? config.spike_dims : config.dim;
            const int d = static_cast<int>(token_rng.below(span));
            const double magnitude =
                config.spike_scale * token_rng.uniform(1.0, 2.0);
            token(i, d) += token_rng.below(2) == 0 ? magnitude : -magnitude;
          }
        }

        FeatureSequence seq;
        seq.utterance_id = "s" + two_digits(s) + "_t" + two_digits(t) + "_k" +
                           two_digits(k);
        seq.frames = token.cast<float>();
        seq.frame_rate_hz = 100.0f;

        WordSegment seg;
        seg.utterance_id = seq.utterance_id;
        seg.start_frame = 0;
        seg.end_frame = static_cast<int>(token.rows());
        seg.speaker_id = speaker_id;
        seg.cluster_id = t;

        corpus.speakers.set(seq.utterance_id, speaker_id);
        corpus.features.push_back(std::move(seq));
        corpus.words.push_back({seg, "type" + two_digits(t)});
        corpus.is_eval.push_back(s >= first_eval_speaker);
        corpus.triphones.push_back("a-type" + two_digits(t) + "-b");
      }
    }
  }

  // Gold pairs: all same-type cross-token pairs over training words.
  std::vector<std::vector<int>> train_by_type(config.n_types);
  for (std::size_t w = 0; w < corpus.words.size(); ++w) {
    if (!corpus.is_eval[w]) {
      train_by_type[corpus.words[w].segment.cluster_id].push_back(
          static_cast<int>(w));
    }
  }
  std::vector<std::pair<int, int>> pair_indices;
  for (int t = 0; t < config.n_types; ++t) {
    const auto& members = train_by_type[t];
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        pair_indices.emplace_back(members[i], members[j]);
      }
    }
  }

  // Corrupt an exact fraction: replace the second word with a random
  // training word of a different gold type; the line keeps the first
  // word's predicted cluster.
  const std::size_t n_corrupt = static_cast<std::size_t>(
      std::llround(config.pair_corruption *
                   static_cast<double>(pair_indices.size())));
  std::vector<std::size_t> order(pair_indices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  pair_rng.shuffle(order);

  std::vector<int> all_train;
  for (const auto& members : train_by_type) {
    all_train.insert(all_train.end(), members.begin(), members.end());
  }

  std::vector<bool> corrupt(pair_indices.size(), false);
  for (std::size_t i = 0; i < n_corrupt && i < order.size(); ++i) {
    corrupt[order[i]] = true;
  }
  for (std::size_t i = 0; i < pair_indices.size(); ++i) {
    auto [wa, wb] = pair_indices[i];
    const int type_a = corpus.words[wa].segment.cluster_id;
    if (corrupt[i]) {
      for (;;) {
        const int candidate =
            all_train[pair_rng.below(all_train.size())];
        if (corpus.words[candidate].segment.cluster_id != type_a) {
          wb = candidate;
          break;
        }
      }
    }
    DiscoveredPair pair;
    pair.first = corpus.words[wa].segment;
    pair.second = corpus.words[wb].segment;
    pair.second.cluster_id = type_a;  // predicted cluster from the first word
    corpus.pairs.push_back(std::move(pair));
  }

  return corpus;
}

}  // namespace zr
