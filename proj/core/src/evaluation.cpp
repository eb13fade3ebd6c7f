// core/src/evaluation.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/evaluation.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include <json.hpp>

#include "zr/parallel.hpp"

namespace zr {

EvalReport same_different_ap(const std::vector<LabeledWord>& words,
                             const FeatureSet& features,
                             const SameDifferentOptions& options) {
  std::vector<int> kept;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (words[w].segment.num_frames() >= std::max(1, options.min_frames)) {
      kept.push_back(static_cast<int>(w));
    }
  }
  if (kept.size() < 2) {
    throw DataError("same-different needs at least two words");
  }

  struct PairRef {
    int i = 0;
    int j = 0;
    bool positive = false;
  };
  std::vector<PairRef> pairs;
  int num_positive = 0;
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = a + 1; b < kept.size(); ++b) {
      const LabeledWord& wa = words[kept[a]];
      const LabeledWord& wb = words[kept[b]];
      if (options.cross_speaker_only &&
          wa.segment.speaker_id == wb.segment.speaker_id) {
        continue;
      }
      PairRef p;
      p.i = kept[a];
      p.j = kept[b];
      p.positive = wa.gold_type == wb.gold_type;
      num_positive += p.positive ? 1 : 0;
      pairs.push_back(p);
    }
  }
  if (pairs.empty()) throw DataError("same-different: no admissible word pairs");
  if (num_positive == 0) throw DataError("same-different: no positive pairs");

  std::vector<double> dist(pairs.size());
  parallel_for(pairs.size(), options.num_threads, [&](std::size_t p) {
    dist[p] = dtw_distance(segment_frames(words[pairs[p].i].segment, features),
                           segment_frames(words[pairs[p].j].segment, features),
                           options.metric, true);
  });

  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });

  EvalReport report;
  report.has_ap = true;
  report.num_pairs = static_cast<int>(pairs.size());
  report.num_positive_pairs = num_positive;
  report.pr_points.push_back({0.0, 1.0});

  // Threshold sweep over distinct distance values; a tie group enters the
  // ranking as a block and contributes the precision measured after it.
  const double total_pos = static_cast<double>(num_positive);
  std::size_t k = 0;
  int tp = 0;
  int seen = 0;
  double ap = 0.0;
  while (k < order.size()) {
    std::size_t g = k + 1;
    while (g < order.size() && dist[order[g]] == dist[order[k]]) ++g;
    int group_pos = 0;
    for (std::size_t t = k; t < g; ++t) {
      group_pos += pairs[order[t]].positive ? 1 : 0;
    }
    if (g - k > 1) report.distance_ties = true;
    tp += group_pos;
    seen += static_cast<int>(g - k);
    const double recall = tp / total_pos;
    const double precision = static_cast<double>(tp) / seen;
    report.pr_points.push_back({recall, precision});
    if (group_pos > 0) ap += (group_pos / total_pos) * precision;
    k = g;
  }
  report.ap = ap;
  return report;
}

namespace {

struct Triphone {
  std::string left, mid, right;
};

bool minimal_pair(const Triphone& a, const Triphone& b) {
  return a.left == b.left && a.right == b.right && a.mid != b.mid;
}

}  // namespace

EvalReport abx_error(const std::vector<AbxItem>& items,
                     const FeatureSet& features, const AbxOptions& options) {
  if (items.empty()) throw DataError("abx: no items");

  const int n = static_cast<int>(items.size());
  std::vector<Triphone> phones(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto parts = split_triphone(items[i].triphone_label);
    phones[i] = {parts[0], parts[1], parts[2]};
  }

  std::map<std::pair<std::string, std::string>, std::vector<int>> exemplars;
  std::set<std::string> label_set;
  std::set<std::string> speaker_set;
  for (int i = 0; i < n; ++i) {
    exemplars[{items[i].triphone_label, items[i].segment.speaker_id}].push_back(
        i);
    label_set.insert(items[i].triphone_label);
    speaker_set.insert(items[i].segment.speaker_id);
  }
  const std::vector<std::string> labels(label_set.begin(), label_set.end());
  const std::vector<std::string> speakers(speaker_set.begin(),
                                          speaker_set.end());
  std::map<std::string, Triphone> label_phones;
  for (int i = 0; i < n; ++i) {
    label_phones[items[i].triphone_label] = phones[i];
  }

  // Symmetric pairwise DTW distances, computed once per unordered pair.
  std::vector<std::pair<int, int>> ij;
  ij.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) ij.emplace_back(i, j);
  }
  std::vector<double> tri(ij.size());
  parallel_for(ij.size(), options.num_threads, [&](std::size_t p) {
    tri[p] = dtw_distance(segment_frames(items[ij[p].first].segment, features),
                          segment_frames(items[ij[p].second].segment, features),
                          options.metric, true);
  });
  RowMatrixD dist = RowMatrixD::Zero(n, n);
  for (std::size_t p = 0; p < ij.size(); ++p) {
    dist(ij[p].first, ij[p].second) = tri[p];
    dist(ij[p].second, ij[p].first) = tri[p];
  }

  EvalReport report;
  report.has_abx = true;
  const auto find_exemplars = [&](const std::string& label,
                                  const std::string& speaker)
      -> const std::vector<int>* {
    const auto it = exemplars.find({label, speaker});
    return it == exemplars.end() ? nullptr : &it->second;
  };

  double accuracy_sum = 0.0;
  for (const auto& type_a : labels) {
    for (const auto& type_b : labels) {
      if (type_a == type_b) continue;
      if (!minimal_pair(label_phones[type_a], label_phones[type_b])) continue;
      for (const auto& s : speakers) {
        const auto* a_items = find_exemplars(type_a, s);
        const auto* b_items = find_exemplars(type_b, s);
        if (a_items == nullptr || b_items == nullptr) continue;
        for (const auto& sx : speakers) {
          if (sx == s) continue;
          const auto* x_items = find_exemplars(type_a, sx);
          if (x_items == nullptr) continue;
          AbxCell cell;
          cell.type_a = type_a;
          cell.type_b = type_b;
          cell.speaker_ab = s;
          cell.speaker_x = sx;
          double score = 0.0;
          for (int a : *a_items) {
            for (int b : *b_items) {
              for (int x : *x_items) {
                const double da = dist(a, x);
                const double db = dist(b, x);
                if (da < db) {
                  score += 1.0;
                } else if (da == db) {
                  score += 0.5;
                }
                ++cell.num_triples;
              }
            }
          }
          cell.accuracy = score / cell.num_triples;
          accuracy_sum += cell.accuracy;
          report.abx_cells.push_back(std::move(cell));
        }
      }
    }
  }
  if (report.abx_cells.empty()) {
    throw DataError(
        "abx: no valid cells (need a speaker with both minimal-pair types and "
        "another speaker with the first type)");
  }
  report.abx_error = 1.0 - accuracy_sum / report.abx_cells.size();
  return report;
}

void emit_pr_curve(const EvalReport& report, const std::string& path) {
  if (!report.has_ap) throw DataError("report has no precision-recall data");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "recall,precision\n";
  for (const auto& point : report.pr_points) {
    out << format_double(point.recall) << ','
        << format_double(point.precision) << '\n';
  }
  if (!out.good()) throw DataError("short write to '" + path + "'");
}

std::string report_to_text(const EvalReport& report) {
  std::string text;
  nlohmann::json j;
  if (report.has_ap) {
    text += "AP=" + format_double(report.ap) + "\n";
    j["ap"] = report.ap;
    j["num_pairs"] = report.num_pairs;
    j["num_positive_pairs"] = report.num_positive_pairs;
    j["distance_ties"] = report.distance_ties;
    auto points = nlohmann::json::array();
    for (const auto& point : report.pr_points) {
      points.push_back({point.recall, point.precision});
    }
    j["pr_points"] = std::move(points);
  }
  if (report.has_abx) {
    text += "ABX=" + format_double(report.abx_error) + "\n";
    j["abx_error"] = report.abx_error;
    auto cells = nlohmann::json::array();
    for (const auto& cell : report.abx_cells) {
      cells.push_back({{"type_a", cell.type_a},
                       {"type_b", cell.type_b},
                       {"speaker_ab", cell.speaker_ab},
                       {"speaker_x", cell.speaker_x},
                       {"num_triples", cell.num_triples},
                       {"accuracy", cell.accuracy}});
    }
    j["abx_cells"] = std::move(cells);
  }
  text += j.dump(2);
  text += "\n";
  return text;
}

}  // namespace zr
