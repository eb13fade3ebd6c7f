// core/include/zr/alignment.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Dynamic time warping over frame sequences. Step set {(1,0),(0,1),(1,1)},
// no band constraint; ties in the DP prefer diagonal, then vertical, then
// horizontal so every path is deterministic.

#ifndef ZR_ALIGNMENT_HPP
#define ZR_ALIGNMENT_HPP

#include <utility>
#include <vector>

#include "zr/common.hpp"

namespace zr {

enum class Metric { kCosine, kEuclidean };

Metric metric_from_string(const std::string& name);
std::string to_string(Metric metric);

// Cosine distance 1 - u.v/(|u||v|), defined as 0 when either norm < 1e-12,
// clamped at 0 against rounding.
double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct AlignmentPath {
  std::vector<std::pair<int, int>> steps;  // (0,0) .. (Ta-1, Tb-1)
  double cost = 0.0;                       // accumulated local distances

  int length() const { return static_cast<int>(steps.size()); }
};

// Minimal-cost monotonic alignment of two nonempty equal-dim sequences.
AlignmentPath dtw_align(const Eigen::Ref<const RowMatrixF>& a,
                        const Eigen::Ref<const RowMatrixF>& b,
                        Metric metric = Metric::kCosine);

// Alignment cost divided by path length; pass normalize=false for the raw
// accumulated cost.
double dtw_distance(const Eigen::Ref<const RowMatrixF>& a,
                    const Eigen::Ref<const RowMatrixF>& b,
                    Metric metric = Metric::kCosine, bool normalize = true);

}  // namespace zr

#endif  // ZR_ALIGNMENT_HPP
