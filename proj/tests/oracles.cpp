// tests/oracles.cpp
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace zr::oracles {

namespace {

// Local distances recomputed here rather than taken from the library DP.
RowMatrixD local_matrix(const Eigen::Ref<const RowMatrixF>& a,
                        const Eigen::Ref<const RowMatrixF>& b, Metric metric) {
  const int ta = static_cast<int>(a.rows());
  const int tb = static_cast<int>(b.rows());
  const Eigen::MatrixXd ad = a.cast<double>().transpose();
  const Eigen::MatrixXd bd = b.cast<double>().transpose();
  RowMatrixD d(ta, tb);
  for (int i = 0; i < ta; ++i) {
    for (int j = 0; j < tb; ++j) {
      if (metric == Metric::kCosine) {
        d(i, j) = cosine_distance(ad.col(i), bd.col(j));
      } else {
        d(i, j) = (ad.col(i) - bd.col(j)).norm();
      }
    }
  }
  return d;
}

void enumerate(const RowMatrixD& d, int i, int j, double accum, int steps,
               BruteForceAlignment* best) {
  const int ta = static_cast<int>(d.rows());
  const int tb = static_cast<int>(d.cols());
  if (i == ta - 1 && j == tb - 1) {
    ++best->paths;
    if (best->paths == 1 || accum < best->cost) {
      best->cost = accum;
      best->length = steps;
      best->unique_length = true;
    } else if (accum == best->cost && steps != best->length) {
      best->unique_length = false;
    }
    return;
  }
  if (i + 1 < ta && j + 1 < tb) {
    enumerate(d, i + 1, j + 1, accum + d(i + 1, j + 1), steps + 1, best);
  }
  if (i + 1 < ta) enumerate(d, i + 1, j, accum + d(i + 1, j), steps + 1, best);
  if (j + 1 < tb) enumerate(d, i, j + 1, accum + d(i, j + 1), steps + 1, best);
}

}  // namespace

BruteForceAlignment brute_force_dtw(const Eigen::Ref<const RowMatrixF>& a,
                                    const Eigen::Ref<const RowMatrixF>& b,
                                    Metric metric) {
  if (a.rows() < 1 || b.rows() < 1 || a.rows() > 8 || b.rows() > 8) {
    throw std::invalid_argument("brute_force_dtw: lengths must be in [1, 8]");
  }
  const RowMatrixD d = local_matrix(a, b, metric);
  BruteForceAlignment best;
  enumerate(d, 0, 0, d(0, 0), 1, &best);
  return best;
}

double brute_force_dtw_distance(const Eigen::Ref<const RowMatrixF>& a,
                                const Eigen::Ref<const RowMatrixF>& b,
                                Metric metric, bool normalize) {
  const BruteForceAlignment best = brute_force_dtw(a, b, metric);
  if (!normalize) return best.cost;
  if (!best.unique_length) {
    throw std::runtime_error("brute_force_dtw_distance: ambiguous path length");
  }
  return best.cost / static_cast<double>(best.length);
}

double average_precision(std::vector<std::pair<double, bool>> scored) {
  if (scored.empty()) throw std::invalid_argument("average_precision: empty");
  std::sort(scored.begin(), scored.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  long long total_pos = 0;
  for (const auto& s : scored) total_pos += s.second ? 1 : 0;
  if (total_pos == 0) {
    throw std::invalid_argument("average_precision: no positives");
  }

  double ap = 0.0;
  long long tp = 0;
  long long seen = 0;
  std::size_t k = 0;
  while (k < scored.size()) {
    std::size_t g = k;
    long long group_pos = 0;
    while (g < scored.size() && scored[g].first == scored[k].first) {
      group_pos += scored[g].second ? 1 : 0;
      ++g;
    }
    tp += group_pos;
    seen += static_cast<long long>(g - k);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(seen);
    const double recall_step =
        static_cast<double>(group_pos) / static_cast<double>(total_pos);
    ap += recall_step * precision;
    k = g;
  }
  return ap;
}

double same_different_ap_oracle(const std::vector<LabeledWord>& words,
                                const FeatureSet& features,
                                const SameDifferentOptions& options) {
  std::vector<const LabeledWord*> kept;
  for (const auto& w : words) {
    if (w.segment.num_frames() >= std::max(1, options.min_frames)) {
      kept.push_back(&w);
    }
  }
  std::vector<std::pair<double, bool>> scored;
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = a + 1; b < kept.size(); ++b) {
      if (options.cross_speaker_only &&
          kept[a]->segment.speaker_id == kept[b]->segment.speaker_id) {
        continue;
      }
      const double dist = brute_force_dtw_distance(
          segment_frames(kept[a]->segment, features),
          segment_frames(kept[b]->segment, features), options.metric, true);
      scored.emplace_back(dist, kept[a]->gold_type == kept[b]->gold_type);
    }
  }
  return average_precision(std::move(scored));
}

namespace {

struct Phones {
  std::string left, mid, right;
};

Phones parse_triphone(const std::string& label) {
  const std::size_t p1 = label.find('-');
  const std::size_t p2 = label.rfind('-');
  if (p1 == std::string::npos || p2 == p1) {
    throw std::invalid_argument("bad triphone label: " + label);
  }
  Phones ph{label.substr(0, p1), label.substr(p1 + 1, p2 - p1 - 1),
            label.substr(p2 + 1)};
  if (ph.left.empty() || ph.mid.empty() || ph.right.empty()) {
    throw std::invalid_argument("bad triphone label: " + label);
  }
  return ph;
}

}  // namespace

AbxOracleResult abx_oracle(const std::vector<AbxItem>& items,
                           const FeatureSet& features, Metric metric) {
  const int n = static_cast<int>(items.size());
  std::vector<Phones> phones(items.size());
  std::set<std::string> label_set;
  std::set<std::string> speaker_set;
  for (int i = 0; i < n; ++i) {
    phones[i] = parse_triphone(items[i].triphone_label);
    label_set.insert(items[i].triphone_label);
    speaker_set.insert(items[i].segment.speaker_id);
  }
  std::map<std::string, Phones> label_phones;
  for (int i = 0; i < n; ++i) {
    label_phones[items[i].triphone_label] = phones[i];
  }

  RowMatrixD dist = RowMatrixD::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      dist(i, j) = brute_force_dtw_distance(
          segment_frames(items[i].segment, features),
          segment_frames(items[j].segment, features), metric, true);
      dist(j, i) = dist(i, j);
    }
  }

  const auto items_of = [&](const std::string& label, const std::string& spk) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
      if (items[i].triphone_label == label &&
          items[i].segment.speaker_id == spk) {
        out.push_back(i);
      }
    }
    return out;
  };

  AbxOracleResult result;
  double accuracy_sum = 0.0;
  for (const auto& la : label_set) {
    for (const auto& lb : label_set) {
      if (la == lb) continue;
      const Phones& pa = label_phones[la];
      const Phones& pb = label_phones[lb];
      if (pa.left != pb.left || pa.right != pb.right || pa.mid == pb.mid) {
        continue;
      }
      for (const auto& s : speaker_set) {
        const std::vector<int> as = items_of(la, s);
        const std::vector<int> bs = items_of(lb, s);
        if (as.empty() || bs.empty()) continue;
        for (const auto& sx : speaker_set) {
          if (sx == s) continue;
          const std::vector<int> xs = items_of(la, sx);
          if (xs.empty()) continue;
          double score = 0.0;
          long long count = 0;
          for (int a : as) {
            for (int b : bs) {
              for (int x : xs) {
                const double da = dist(a, x);
                const double db = dist(b, x);
                if (da < db) {
                  score += 1.0;
                } else if (da == db) {
                  score += 0.5;
                }
                ++count;
              }
            }
          }
          accuracy_sum += score / static_cast<double>(count);
          result.triples += count;
          ++result.cells;
        }
      }
    }
  }
  if (result.cells == 0) {
    throw std::runtime_error("abx_oracle: no valid cells");
  }
  result.error = 1.0 - accuracy_sum / static_cast<double>(result.cells);
  return result;
}

}  // namespace zr::oracles
