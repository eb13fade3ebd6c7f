// core/include/zr/features.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Acoustic front end: MFCC extraction, per-speaker cepstral mean/variance
// normalisation, delta appending, and the feature archive format.
//
// Archive layout (binary, little-endian):
//   magic "ZRFA1\0" (6 bytes)
//   u32 record count
//   per record: u16 id byte length, UTF-8 utterance id, u32 T, u32 D,
//               f32 frame rate, T*D f32 frames row-major

#ifndef ZR_FEATURES_HPP
#define ZR_FEATURES_HPP

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "zr/common.hpp"

namespace zr {

struct FeatureSequence {
  std::string utterance_id;
  RowMatrixF frames;  // T x D, one row per frame
  float frame_rate_hz = 100.0f;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

// utterance_id -> speaker_id. Ordered map so iteration order is stable.
class SpeakerMap {
 public:
  void set(const std::string& utterance_id, const std::string& speaker_id) {
    entries_[utterance_id] = speaker_id;
  }
  const std::string& speaker_of(const std::string& utterance_id) const;
  bool contains(const std::string& utterance_id) const {
    return entries_.count(utterance_id) != 0;
  }
  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
};

// Text format: one line per utterance, `utterance_id<TAB>speaker_id`.
SpeakerMap read_speaker_map(const std::string& path);
void write_speaker_map(const SpeakerMap& map, const std::string& path);

// Owning collection of sequences with id lookup.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(std::vector<FeatureSequence> sequences);

  void add(FeatureSequence seq);
  const FeatureSequence& at(const std::string& utterance_id) const;
  bool contains(const std::string& utterance_id) const {
    return index_.count(utterance_id) != 0;
  }
  const std::vector<FeatureSequence>& sequences() const { return sequences_; }
  std::vector<FeatureSequence>& sequences() { return sequences_; }
  std::size_t size() const { return sequences_.size(); }

 private:
  std::vector<FeatureSequence> sequences_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct MfccConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  double preemphasis = 0.97;
  int num_filters = 26;
  int num_ceps = 13;  // c0..c12, c0 retained
  double log_floor = 1e-10;
};

// 13-dim MFCCs at 100 frames/s: pre-emphasis, Hamming window, power
// spectrum, triangular mel filterbank over [0, sr/2], log with floor,
// orthonormal DCT-II. Throws DataError for audio shorter than one window
// or containing non-finite samples.
FeatureSequence compute_mfcc(const std::vector<float>& samples,
                             int sample_rate_hz,
                             const std::string& utterance_id,
                             const MfccConfig& config = {});

// Pre-DCT log mel filterbank energies for one analysis frame; exposed for
// diagnostics and tests. `frame` must hold exactly the window samples.
std::vector<double> log_mel_energies(const std::vector<float>& frame,
                                     int sample_rate_hz,
                                     const MfccConfig& config = {});

enum class CmvnGrouping { kSpeaker, kUtterance };

// Normalises each dimension to zero mean, unit variance over all frames of
// the group (per speaker by default). Variance floor 1e-8 before division.
std::vector<FeatureSequence> apply_cmvn(
    const std::vector<FeatureSequence>& sequences, const SpeakerMap& speakers,
    CmvnGrouping grouping = CmvnGrouping::kSpeaker);

// Appends first- and second-order regression deltas (window 2, replication
// padding at the edges); output dim is 3x the input dim.
FeatureSequence add_deltas(const FeatureSequence& seq);

void write_archive(const std::vector<FeatureSequence>& sequences,
                   const std::string& path);
std::vector<FeatureSequence> read_archive(const std::string& path);

}  // namespace zr

#endif  // ZR_FEATURES_HPP
