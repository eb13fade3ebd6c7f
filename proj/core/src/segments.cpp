// core/src/segments.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/segments.hpp"

#include <array>
#include <charconv>
#include <fstream>

namespace zr {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  for (;;) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

int parse_int(const std::string& s, const std::string& context) {
  int value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("bad integer '" + s + "' in " + context);
  }
  return value;
}

WordSegment parse_segment(const std::vector<std::string>& fields,
                          const FeatureSet& features,
                          const SpeakerMap& speakers,
                          const std::string& context) {
  WordSegment seg;
  seg.utterance_id = fields[0];
  seg.start_frame = parse_int(fields[1], context);
  seg.end_frame = parse_int(fields[2], context);
  seg.speaker_id = fields[3];
  const FeatureSequence& seq = features.at(seg.utterance_id);
  if (seg.start_frame < 0 || seg.end_frame <= seg.start_frame ||
      seg.end_frame > seq.num_frames()) {
    throw DataError("segment out of bounds in " + context + ": [" +
                    fields[1] + ", " + fields[2] + ") of '" +
                    seg.utterance_id + "' with " +
                    std::to_string(seq.num_frames()) + " frames");
  }
  if (speakers.speaker_of(seg.utterance_id) != seg.speaker_id) {
    throw DataError("speaker mismatch in " + context + ": '" +
                    seg.speaker_id + "' vs map entry '" +
                    speakers.speaker_of(seg.utterance_id) + "'");
  }
  return seg;
}

template <typename Fn>
void for_each_data_line(const std::string& path, Fn&& fn) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open list file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    fn(line, line_no);
  }
}

}  // namespace

Eigen::Ref<const RowMatrixF> segment_frames(const WordSegment& segment,
                                            const FeatureSet& features) {
  const FeatureSequence& seq = features.at(segment.utterance_id);
  if (segment.start_frame < 0 || segment.end_frame <= segment.start_frame ||
      segment.end_frame > seq.num_frames()) {
    throw DataError("segment out of bounds for utterance '" +
                    segment.utterance_id + "'");
  }
  return seq.frames.middleRows(segment.start_frame, segment.num_frames());
}

std::array<std::string, 3> split_triphone(const std::string& label) {
  std::array<std::string, 3> phones;
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) {
    const auto dash = label.find('-', pos);
    if (dash == std::string::npos || dash == pos) {
      throw DataError("triphone label must encode three phones: '" + label +
                      "'");
    }
    phones[i] = label.substr(pos, dash - pos);
    pos = dash + 1;
  }
  phones[2] = label.substr(pos);
  if (phones[2].empty() || phones[2].find('-') != std::string::npos) {
    throw DataError("triphone label must encode three phones: '" + label +
                    "'");
  }
  return phones;
}

std::vector<LabeledWord> read_word_list(const std::string& path,
                                        const FeatureSet& features,
                                        const SpeakerMap& speakers) {
  std::vector<LabeledWord> words;
  for_each_data_line(path, [&](const std::string& line, int line_no) {
    const std::string context = path + " line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw DataError("expected 5 tab-separated fields in " + context);
    }
    LabeledWord w;
    w.segment = parse_segment(fields, features, speakers, context);
    w.gold_type = fields[4];
    if (w.gold_type.empty()) {
      throw DataError("empty gold label in " + context);
    }
    words.push_back(std::move(w));
  });
  return words;
}

void write_word_list(const std::vector<LabeledWord>& words,
                     const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write word list: " + path);
  for (const auto& w : words) {
    os << w.segment.utterance_id << '\t' << w.segment.start_frame << '\t'
       << w.segment.end_frame << '\t' << w.segment.speaker_id << '\t'
       << w.gold_type << '\n';
  }
}

std::vector<AbxItem> read_abx_list(const std::string& path,
                                   const FeatureSet& features,
                                   const SpeakerMap& speakers) {
  std::vector<AbxItem> items;
  for_each_data_line(path, [&](const std::string& line, int line_no) {
    const std::string context = path + " line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() != 6) {
      throw DataError("expected 6 tab-separated fields in " + context);
    }
    AbxItem item;
    item.segment = parse_segment(fields, features, speakers, context);
    item.triphone_label = fields[5];
    split_triphone(item.triphone_label);  // validate
    items.push_back(std::move(item));
  });
  return items;
}

void write_abx_list(const std::vector<AbxItem>& items,
                    const std::vector<std::string>& gold_types,
                    const std::string& path) {
  if (!gold_types.empty() && gold_types.size() != items.size()) {
    throw DataError("gold label count does not match ABX item count");
  }
  std::ofstream os(path);
  if (!os) throw DataError("cannot write ABX list: " + path);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    os << item.segment.utterance_id << '\t' << item.segment.start_frame
       << '\t' << item.segment.end_frame << '\t' << item.segment.speaker_id
       << '\t' << (gold_types.empty() ? item.triphone_label : gold_types[i])
       << '\t' << item.triphone_label << '\n';
  }
}

}  // namespace zr
