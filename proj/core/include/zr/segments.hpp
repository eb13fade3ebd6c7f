// core/include/zr/segments.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Word segment types shared by pairing and evaluation, plus the tab-separated
// list files:
//   word list: utt_id<TAB>start<TAB>end<TAB>speaker<TAB>gold_label
//   ABX list:  word list columns plus a triphone label column
// Frame indices are at 100 fps with exclusive end; `#` lines are comments.

#ifndef ZR_SEGMENTS_HPP
#define ZR_SEGMENTS_HPP

#include <array>
#include <string>
#include <vector>

#include "zr/features.hpp"

namespace zr {

struct WordSegment {
  std::string utterance_id;
  int start_frame = 0;  // inclusive
  int end_frame = 0;    // exclusive
  std::string speaker_id;
  int cluster_id = 0;

  int num_frames() const { return end_frame - start_frame; }
};

// Slice of the owning utterance's frames; validates bounds.
Eigen::Ref<const RowMatrixF> segment_frames(const WordSegment& segment,
                                            const FeatureSet& features);

struct LabeledWord {
  WordSegment segment;
  std::string gold_type;
};

struct AbxItem {
  WordSegment segment;
  std::string triphone_label;  // three phones joined by '-'
};

// Splits a triphone label into its three phones; throws DataError if the
// label does not encode exactly three nonempty phones.
std::array<std::string, 3> split_triphone(const std::string& label);

std::vector<LabeledWord> read_word_list(const std::string& path,
                                        const FeatureSet& features,
                                        const SpeakerMap& speakers);
void write_word_list(const std::vector<LabeledWord>& words,
                     const std::string& path);

std::vector<AbxItem> read_abx_list(const std::string& path,
                                   const FeatureSet& features,
                                   const SpeakerMap& speakers);
void write_abx_list(const std::vector<AbxItem>& items,
                    const std::vector<std::string>& gold_types,
                    const std::string& path);

}  // namespace zr

#endif  // ZR_SEGMENTS_HPP
