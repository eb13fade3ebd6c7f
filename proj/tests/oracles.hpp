// tests/oracles.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used to cross-check the library:
// alignment cost by exhaustive path enumeration, average precision by a
// direct threshold sweep, and ABX error by explicit triple enumeration.
// Everything here favours obviousness over speed; keep inputs tiny.

#ifndef ZR_TESTS_ORACLES_HPP
#define ZR_TESTS_ORACLES_HPP

#include <utility>
#include <vector>

#include "zr/alignment.hpp"
#include "zr/evaluation.hpp"
#include "zr/features.hpp"
#include "zr/segments.hpp"

namespace zr::oracles {

struct BruteForceAlignment {
  double cost = 0.0;       // minimum over all monotone paths
  int length = 0;          // steps on the cheapest path found
  bool unique_length = true;  // false if equal-cost paths differ in length
  long long paths = 0;     // complete paths enumerated
};

// Enumerates every monotone path over the local-distance matrix and returns
// the cheapest. Exponential in the sequence lengths; both must be <= 8.
BruteForceAlignment brute_force_dtw(const Eigen::Ref<const RowMatrixF>& a,
                                    const Eigen::Ref<const RowMatrixF>& b,
                                    Metric metric);

// cost / length of the cheapest path; requires a unique path length.
double brute_force_dtw_distance(const Eigen::Ref<const RowMatrixF>& a,
                                const Eigen::Ref<const RowMatrixF>& b,
                                Metric metric, bool normalize);

// Average precision over (distance, is_positive) items: sort by distance,
// sweep the threshold across distinct values admitting tied items together,
// and sum recall increments times the precision after each group.
double average_precision(std::vector<std::pair<double, bool>> scored);

// Same-different AP with distances from brute_force_dtw_distance. Mirrors
// the admission rules of same_different_ap.
double same_different_ap_oracle(const std::vector<LabeledWord>& words,
                                const FeatureSet& features,
                                const SameDifferentOptions& options = {});

struct AbxOracleResult {
  double error = 0.0;
  int cells = 0;
  long long triples = 0;
};

// ABX error by scanning all items per cell; minimal pairs share left and
// right phone context and differ in the middle phone.
AbxOracleResult abx_oracle(const std::vector<AbxItem>& items,
                           const FeatureSet& features,
                           Metric metric = Metric::kCosine);

}  // namespace zr::oracles

#endif  // ZR_TESTS_ORACLES_HPP
