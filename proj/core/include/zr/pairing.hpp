// core/include/zr/pairing.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Discovered-pair lists and the frame-level training items built from them.
//
// Pair-list file: UTF-8 text, one pair per line, 7 tab-separated fields
//   cluster_id utt_a start_a end_a utt_b start_b end_b
// with frame indices at 100 fps (end exclusive); `#` lines are comments.
//
// Dataset file (binary, little-endian):
//   magic "ZRDS1\0"; u8 item kind (0 pairs, 1 triplets, 2 quadruplets);
//   u32 dim; u32 speaker count, speakers as (u16 len, bytes); u32 item count;
//   per item, f32 vectors and u32 speaker/cluster indices in field order.

#ifndef ZR_PAIRING_HPP
#define ZR_PAIRING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zr/alignment.hpp"
#include "zr/features.hpp"
#include "zr/segments.hpp"

namespace zr {

struct DiscoveredPair {
  WordSegment first;
  WordSegment second;  // same cluster_id as first
};

struct FramePair {
  Eigen::VectorXf x_a;
  Eigen::VectorXf x_b;
  std::string speaker_a;
  std::string speaker_b;
  int cluster_id = 0;
};

struct FrameTriplet {
  FramePair pair;
  Eigen::VectorXf x_neg;
  std::string neg_speaker;  // equals pair.speaker_a
  int neg_cluster = 0;      // differs from pair.cluster_id
  // Provenance used by quadruplet sampling; not serialized.
  int neg_segment_index = -1;  // index into the segment list
  int neg_frame_offset = -1;   // frame index within the negative segment
};

struct FrameQuadruplet {
  FrameTriplet triplet;
  Eigen::VectorXf x_neg_b;    // frame DTW-aligned to x_neg
  std::string neg_b_speaker;  // speaker of the fourth word
};

// Parses and validates a pair list against the feature archive and speaker
// map. Errors name the offending line.
std::vector<DiscoveredPair> load_pair_list(const std::string& path,
                                           const FeatureSet& features,
                                           const SpeakerMap& speakers);

void write_pair_list(const std::vector<DiscoveredPair>& pairs,
                     const std::string& path);

// Unique word segments referenced by a pair list, in first-appearance order.
std::vector<WordSegment> collect_segments(
    const std::vector<DiscoveredPair>& pairs);

// DTW-aligns each discovered pair and emits one frame pair per path step in
// both directions (a->b then b->a).
std::vector<FramePair> build_frame_pairs(
    const std::vector<DiscoveredPair>& pairs, const FeatureSet& features,
    Metric metric = Metric::kCosine);

struct SamplingSummary {
  std::size_t emitted = 0;
  std::size_t dropped = 0;
};

// For each frame pair, samples a negative frame: uniform over words with the
// same speaker as speaker_a and a different cluster, then uniform over that
// word's frames. Pairs with no eligible word are dropped and counted.
std::vector<FrameTriplet> sample_triplets(
    const std::vector<FramePair>& frame_pairs,
    const std::vector<WordSegment>& segments, const FeatureSet& features,
    std::uint64_t seed, SamplingSummary* summary = nullptr);

// For each triplet, samples a fourth word uniformly among words of the
// negative cluster (excluding the negative word itself), DTW-aligns it to
// the negative word and takes the frame aligned with x_neg: the first path
// step touching the negative frame index.
std::vector<FrameQuadruplet> sample_quadruplets(
    const std::vector<FrameTriplet>& triplets,
    const std::vector<WordSegment>& segments, const FeatureSet& features,
    std::uint64_t seed, Metric metric = Metric::kCosine,
    SamplingSummary* summary = nullptr);

enum class DatasetKind : std::uint8_t {
  kFramePairs = 0,
  kFrameTriplets = 1,
  kFrameQuadruplets = 2,
};

std::string to_string(DatasetKind kind);

// In-memory training dataset; exactly one of the item vectors is nonempty
// (matching `kind`) unless the dataset is empty.
struct Dataset {
  DatasetKind kind = DatasetKind::kFramePairs;
  int dim = 0;
  std::vector<FramePair> pairs;
  std::vector<FrameTriplet> triplets;
  std::vector<FrameQuadruplet> quadruplets;

  std::size_t size() const;
  // Distinct speaker ids over all item fields, in first-appearance order.
  std::vector<std::string> speaker_ids() const;
};

void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace zr

#endif  // ZR_PAIRING_HPP
