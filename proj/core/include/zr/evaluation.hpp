// core/include/zr/evaluation.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Intrinsic evaluation: same-different word discrimination scored as
// average precision over a DTW distance ranking, and cross-speaker
// minimal-pair ABX discrimination. Both run on segmented word features.

#ifndef ZR_EVALUATION_HPP
#define ZR_EVALUATION_HPP

#include <string>
#include <vector>

#include "zr/alignment.hpp"
#include "zr/features.hpp"
#include "zr/segments.hpp"

namespace zr {

struct PrPoint {
  double recall = 0.0;
  double precision = 1.0;
};

struct AbxCell {
  std::string type_a;     // the type X shares
  std::string type_b;
  std::string speaker_ab;  // provides the A and B exemplars
  std::string speaker_x;
  int num_triples = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  bool has_ap = false;
  double ap = 0.0;
  std::vector<PrPoint> pr_points;  // (0,1) plus one point per distinct threshold
  bool distance_ties = false;
  int num_pairs = 0;
  int num_positive_pairs = 0;

  bool has_abx = false;
  double abx_error = 0.0;
  std::vector<AbxCell> abx_cells;
};

struct SameDifferentOptions {
  Metric metric = Metric::kCosine;
  bool cross_speaker_only = false;
  int min_frames = 0;  // drop words shorter than this many frames
  int num_threads = 1;
};

// Ranks all admitted word pairs by path-normalized DTW distance and sweeps
// the threshold across distinct distance values; tied pairs enter together.
// AP is the area under the resulting stepwise precision-recall curve.
EvalReport same_different_ap(const std::vector<LabeledWord>& words,
                             const FeatureSet& features,
                             const SameDifferentOptions& options = {});

struct AbxOptions {
  Metric metric = Metric::kCosine;
  int num_threads = 1;
};

// Cells are (ordered minimal-pair labels) x (speaker holding A and B) x
// (other speaker holding X of A's type). Triples score 1 when
// d(A,X) < d(B,X), 0.5 on an exact tie, 0 otherwise; the reported error is
// 1 minus the macro-average of cell accuracies.
EvalReport abx_error(const std::vector<AbxItem>& items,
                     const FeatureSet& features, const AbxOptions& options = {});

// CSV with header `recall,precision`, one row per PR point.
void emit_pr_curve(const EvalReport& report, const std::string& path);

// `AP=` / `ABX=` summary lines followed by a machine-readable JSON block.
std::string report_to_text(const EvalReport& report);

}  // namespace zr

#endif  // ZR_EVALUATION_HPP
