// core/src/pairing.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/pairing.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "binio.hpp"
#include "zr/rng.hpp"

namespace zr {

namespace {

int parse_int_field(const std::string& s, const std::string& context) {
  int value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("bad integer '" + s + "' in " + context);
  }
  return value;
}

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

WordSegment make_segment(const std::string& utt, int start, int end,
                         int cluster, const FeatureSet& features,
                         const SpeakerMap& speakers,
                         const std::string& context) {
  const FeatureSequence& seq = features.at(utt);
  if (start < 0 || end <= start || end > seq.num_frames()) {
    throw DataError("segment out of bounds in " + context + ": [" +
                    std::to_string(start) + ", " + std::to_string(end) +
                    ") of '" + utt + "' with " +
                    std::to_string(seq.num_frames()) + " frames");
  }
  WordSegment seg;
  seg.utterance_id = utt;
  seg.start_frame = start;
  seg.end_frame = end;
  seg.speaker_id = speakers.speaker_of(utt);
  seg.cluster_id = cluster;
  return seg;
}

struct SegmentKey {
  std::string utt;
  int start, end, cluster;
  bool operator==(const SegmentKey&) const = default;
};

struct SegmentKeyHash {
  std::size_t operator()(const SegmentKey& k) const {
    std::size_t h = std::hash<std::string>{}(k.utt);
    h = h * 1315423911u + static_cast<std::size_t>(k.start);
    h = h * 1315423911u + static_cast<std::size_t>(k.end);
    h = h * 1315423911u + static_cast<std::size_t>(k.cluster);
    return h;
  }
};

Eigen::VectorXf frame_at(const FeatureSet& features, const WordSegment& seg,
                         int offset) {
  return features.at(seg.utterance_id)
      .frames.row(seg.start_frame + offset)
      .transpose();
}

}  // namespace

std::vector<DiscoveredPair> load_pair_list(const std::string& path,
                                           const FeatureSet& features,
                                           const SpeakerMap& speakers) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open pair list: " + path);
  std::vector<DiscoveredPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::string context = path + " line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() != 7) {
      throw DataError("expected 7 tab-separated fields in " + context);
    }
    const int cluster = parse_int_field(fields[0], context);
    if (cluster < 0) {
      throw DataError("negative cluster id in " + context);
    }
    DiscoveredPair pair;
    pair.first =
        make_segment(fields[1], parse_int_field(fields[2], context),
                     parse_int_field(fields[3], context), cluster, features,
                     speakers, context);
    pair.second =
        make_segment(fields[4], parse_int_field(fields[5], context),
                     parse_int_field(fields[6], context), cluster, features,
                     speakers, context);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void write_pair_list(const std::vector<DiscoveredPair>& pairs,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path + "'");
  for (const auto& p : pairs) {
    os << p.first.cluster_id << '\t' << p.first.utterance_id << '\t'
       << p.first.start_frame << '\t' << p.first.end_frame << '\t'
       << p.second.utterance_id << '\t' << p.second.start_frame << '\t'
       << p.second.end_frame << '\n';
  }
  if (!os.good()) throw DataError("short write to '" + path + "'");
}

std::vector<WordSegment> collect_segments(
    const std::vector<DiscoveredPair>& pairs) {
  std::vector<WordSegment> segments;
  std::unordered_set<SegmentKey, SegmentKeyHash> seen;
  auto add = [&](const WordSegment& seg) {
    const SegmentKey key{seg.utterance_id, seg.start_frame, seg.end_frame,
                         seg.cluster_id};
    if (seen.insert(key).second) segments.push_back(seg);
  };
  for (const auto& p : pairs) {
    add(p.first);
    add(p.second);
  }
  return segments;
}

std::vector<FramePair> build_frame_pairs(
    const std::vector<DiscoveredPair>& pairs, const FeatureSet& features,
    Metric metric) {
  std::vector<FramePair> out;
  for (const auto& p : pairs) {
    const auto a = segment_frames(p.first, features);
    const auto b = segment_frames(p.second, features);
    const AlignmentPath path = dtw_align(a, b, metric);
    // Forward direction, then reverse, matching the two decoder targets of
    // the combined loss.
    for (const auto& [i, j] : path.steps) {
      FramePair fp;
      fp.x_a = a.row(i).transpose();
      fp.x_b = b.row(j).transpose();
      fp.speaker_a = p.first.speaker_id;
      fp.speaker_b = p.second.speaker_id;
      fp.cluster_id = p.first.cluster_id;
      out.push_back(std::move(fp));
    }
    for (const auto& [i, j] : path.steps) {
      FramePair fp;
      fp.x_a = b.row(j).transpose();
      fp.x_b = a.row(i).transpose();
      fp.speaker_a = p.second.speaker_id;
      fp.speaker_b = p.first.speaker_id;
      fp.cluster_id = p.first.cluster_id;
      out.push_back(std::move(fp));
    }
  }
  return out;
}

std::vector<FrameTriplet> sample_triplets(
    const std::vector<FramePair>& frame_pairs,
    const std::vector<WordSegment>& segments, const FeatureSet& features,
    std::uint64_t seed, SamplingSummary* summary) {
  // Per-speaker word index plus per-(speaker, cluster) counts so
  // "any eligible word exists" is a cheap lookup.
  std::unordered_map<std::string, std::vector<int>> by_speaker;
  std::map<std::pair<std::string, int>, int> cluster_count;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_speaker[segments[s].speaker_id].push_back(static_cast<int>(s));
    ++cluster_count[{segments[s].speaker_id, segments[s].cluster_id}];
  }

  Rng rng(seed);
  std::vector<FrameTriplet> out;
  SamplingSummary stats;
  for (const auto& fp : frame_pairs) {
    const auto it = by_speaker.find(fp.speaker_a);
    const int same_cluster =
        cluster_count.count({fp.speaker_a, fp.cluster_id})
            ? cluster_count.at({fp.speaker_a, fp.cluster_id})
            : 0;
    const int eligible =
        it == by_speaker.end()
            ? 0
            : static_cast<int>(it->second.size()) - same_cluster;
    if (eligible <= 0) {
      ++stats.dropped;
      continue;
    }
    // Uniform over eligible words via rejection on the speaker's word list.
    int seg_index = -1;
    for (;;) {
      const int candidate =
          it->second[rng.below(it->second.size())];
      if (segments[candidate].cluster_id != fp.cluster_id) {
        seg_index = candidate;
        break;
      }
    }
    const WordSegment& neg = segments[seg_index];
    const int offset = static_cast<int>(rng.below(neg.num_frames()));

    FrameTriplet t;
    t.pair = fp;
    t.x_neg = frame_at(features, neg, offset);
    t.neg_speaker = neg.speaker_id;
    t.neg_cluster = neg.cluster_id;
    t.neg_segment_index = seg_index;
    t.neg_frame_offset = offset;
    out.push_back(std::move(t));
    ++stats.emitted;
  }
  if (summary) *summary = stats;
  return out;
}

std::vector<FrameQuadruplet> sample_quadruplets(
    const std::vector<FrameTriplet>& triplets,
    const std::vector<WordSegment>& segments, const FeatureSet& features,
    std::uint64_t seed, Metric metric, SamplingSummary* summary) {
  std::unordered_map<int, std::vector<int>> by_cluster;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_cluster[segments[s].cluster_id].push_back(static_cast<int>(s));
  }

  Rng rng(seed);
  std::vector<FrameQuadruplet> out;
  SamplingSummary stats;
  for (const auto& t : triplets) {
    if (t.neg_segment_index < 0 || t.neg_frame_offset < 0) {
      throw DataError(
          "sample_quadruplets requires triplets with sampling provenance "
          "(produced by sample_triplets in the same run)");
    }
    const auto it = by_cluster.find(t.neg_cluster);
    const int candidates =
        it == by_cluster.end() ? 0 : static_cast<int>(it->second.size()) - 1;
    if (candidates <= 0) {
      ++stats.dropped;
      continue;
    }
    int fourth_index = -1;
    for (;;) {
      const int candidate = it->second[rng.below(it->second.size())];
      if (candidate != t.neg_segment_index) {
        fourth_index = candidate;
        break;
      }
    }
    const WordSegment& third = segments[t.neg_segment_index];
    const WordSegment& fourth = segments[fourth_index];
    const AlignmentPath path = dtw_align(segment_frames(third, features),
                                         segment_frames(fourth, features),
                                         metric);
    // First path step touching the sampled negative frame.
    int aligned_j = -1;
    for (const auto& [i, j] : path.steps) {
      if (i == t.neg_frame_offset) {
        aligned_j = j;
        break;
      }
    }
    if (aligned_j < 0) {
      throw DataError("alignment path misses a frame index");  // unreachable
    }

    FrameQuadruplet q;
    q.triplet = t;
    q.x_neg_b = frame_at(features, fourth, aligned_j);
    q.neg_b_speaker = fourth.speaker_id;
    out.push_back(std::move(q));
    ++stats.emitted;
  }
  if (summary) *summary = stats;
  return out;
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kFramePairs:
      return "pairs";
    case DatasetKind::kFrameTriplets:
      return "triplets";
    default:
      return "quadruplets";
  }
}

std::size_t Dataset::size() const {
  switch (kind) {
    case DatasetKind::kFramePairs:
      return pairs.size();
    case DatasetKind::kFrameTriplets:
      return triplets.size();
    default:
      return quadruplets.size();
  }
}

std::vector<std::string> Dataset::speaker_ids() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& id) {
    if (seen.insert(id).second) ids.push_back(id);
  };
  auto add_pair = [&](const FramePair& p) {
    add(p.speaker_a);
    add(p.speaker_b);
  };
  for (const auto& p : pairs) add_pair(p);
  for (const auto& t : triplets) {
    add_pair(t.pair);
    add(t.neg_speaker);
  }
  for (const auto& q : quadruplets) {
    add_pair(q.triplet.pair);
    add(q.triplet.neg_speaker);
    add(q.neg_b_speaker);
  }
  return ids;
}

namespace {

constexpr char kDatasetMagic[6] = {'Z', 'R', 'D', 'S', '1', '\0'};

void write_vector(std::ostream& os, const Eigen::VectorXf& v) {
  io::write_bytes(os, v.data(), sizeof(float) * v.size());
}

Eigen::VectorXf read_vector(std::istream& is, int dim,
                            const std::string& what) {
  Eigen::VectorXf v(dim);
  io::read_bytes(is, v.data(), sizeof(float) * dim, what);
  if (!v.allFinite()) throw DataError("non-finite vector in " + what);
  return v;
}

}  // namespace

void write_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write dataset: " + path);

  const std::vector<std::string> speakers = dataset.speaker_ids();
  std::unordered_map<std::string, std::uint32_t> speaker_index;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    speaker_index[speakers[i]] = static_cast<std::uint32_t>(i);
  }

  io::write_bytes(os, kDatasetMagic, sizeof(kDatasetMagic));
  io::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(dataset.kind));
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.dim));
  io::write_pod<std::uint32_t>(os,
                               static_cast<std::uint32_t>(speakers.size()));
  for (const auto& s : speakers) io::write_string16(os, s);
  io::write_pod<std::uint32_t>(os,
                               static_cast<std::uint32_t>(dataset.size()));

  auto write_pair = [&](const FramePair& p) {
    io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(p.cluster_id));
    io::write_pod<std::uint32_t>(os, speaker_index.at(p.speaker_a));
    io::write_pod<std::uint32_t>(os, speaker_index.at(p.speaker_b));
    write_vector(os, p.x_a);
    write_vector(os, p.x_b);
  };
  auto write_triplet = [&](const FrameTriplet& t) {
    write_pair(t.pair);
    io::write_pod<std::uint32_t>(os,
                                 static_cast<std::uint32_t>(t.neg_cluster));
    io::write_pod<std::uint32_t>(os, speaker_index.at(t.neg_speaker));
    write_vector(os, t.x_neg);
  };

  switch (dataset.kind) {
    case DatasetKind::kFramePairs:
      for (const auto& p : dataset.pairs) write_pair(p);
      break;
    case DatasetKind::kFrameTriplets:
      for (const auto& t : dataset.triplets) write_triplet(t);
      break;
    default:
      for (const auto& q : dataset.quadruplets) {
        write_triplet(q.triplet);
        io::write_pod<std::uint32_t>(os, speaker_index.at(q.neg_b_speaker));
        write_vector(os, q.x_neg_b);
      }
      break;
  }
  if (!os) throw DataError("failed writing dataset: " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open dataset: " + path);
  const std::string what = "dataset " + path;

  char magic[6];
  io::read_bytes(is, magic, sizeof(magic), what);
  if (std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0) {
    throw DataError("not a training dataset: " + path);
  }
  const auto kind_raw = io::read_pod<std::uint8_t>(is, what);
  if (kind_raw > 2) throw DataError("unknown dataset kind in " + path);

  Dataset ds;
  ds.kind = static_cast<DatasetKind>(kind_raw);
  ds.dim = static_cast<int>(io::read_pod<std::uint32_t>(is, what));
  if (ds.dim < 1) throw DataError("invalid dimension in " + path);

  const auto n_speakers = io::read_pod<std::uint32_t>(is, what);
  std::vector<std::string> speakers(n_speakers);
  for (auto& s : speakers) s = io::read_string16(is, what);
  auto speaker_at = [&](std::uint32_t i) -> const std::string& {
    if (i >= speakers.size()) {
      throw DataError("speaker index out of range in " + path);
    }
    return speakers[i];
  };

  const auto count = io::read_pod<std::uint32_t>(is, what);
  auto read_pair = [&]() {
    FramePair p;
    p.cluster_id = static_cast<int>(io::read_pod<std::uint32_t>(is, what));
    p.speaker_a = speaker_at(io::read_pod<std::uint32_t>(is, what));
    p.speaker_b = speaker_at(io::read_pod<std::uint32_t>(is, what));
    p.x_a = read_vector(is, ds.dim, what);
    p.x_b = read_vector(is, ds.dim, what);
    return p;
  };
  auto read_triplet = [&]() {
    FrameTriplet t;
    t.pair = read_pair();
    t.neg_cluster = static_cast<int>(io::read_pod<std::uint32_t>(is, what));
    t.neg_speaker = speaker_at(io::read_pod<std::uint32_t>(is, what));
    t.x_neg = read_vector(is, ds.dim, what);
    return t;
  };

  for (std::uint32_t i = 0; i < count; ++i) {
    switch (ds.kind) {
      case DatasetKind::kFramePairs:
        ds.pairs.push_back(read_pair());
        break;
      case DatasetKind::kFrameTriplets:
        ds.triplets.push_back(read_triplet());
        break;
      default: {
        FrameQuadruplet q;
        q.triplet = read_triplet();
        q.neg_b_speaker = speaker_at(io::read_pod<std::uint32_t>(is, what));
        q.x_neg_b = read_vector(is, ds.dim, what);
        ds.quadruplets.push_back(std::move(q));
        break;
      }
    }
  }
  return ds;
}

}  // namespace zr
