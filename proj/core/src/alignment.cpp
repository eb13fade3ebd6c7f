// core/src/alignment.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zr {

Metric metric_from_string(const std::string& name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  throw DataError("unknown metric '" + name + "' (want cosine or euclidean)");
}

std::string to_string(Metric metric) {
  return metric == Metric::kCosine ? "cosine" : "euclidean";
}

double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  // All three products go through the same dot kernel so that identical
  // vectors give bitwise-equal numerator and norms; with the single sqrt of
  // the product below, d(u, u) is then exactly 0.
  const double uu = u.dot(u);
  const double vv = v.dot(v);
  // norm < 1e-12  <=>  squared norm < 1e-24
  if (uu < 1e-24 || vv < 1e-24) return 0.0;
  return std::max(0.0, 1.0 - u.dot(v) / std::sqrt(uu * vv));
}

namespace {

// Pairwise local distance matrix in double.
RowMatrixD local_distances(const Eigen::Ref<const RowMatrixF>& a,
                           const Eigen::Ref<const RowMatrixF>& b,
                           Metric metric) {
  const int ta = static_cast<int>(a.rows());
  const int tb = static_cast<int>(b.rows());
  RowMatrixD d(ta, tb);
  Eigen::MatrixXd ad = a.cast<double>().transpose();  // dim x ta
  Eigen::MatrixXd bd = b.cast<double>().transpose();
  if (metric == Metric::kCosine) {
    for (int i = 0; i < ta; ++i) {
      for (int j = 0; j < tb; ++j) {
        d(i, j) = cosine_distance(ad.col(i), bd.col(j));
      }
    }
  } else {
    for (int i = 0; i < ta; ++i) {
      for (int j = 0; j < tb; ++j) {
        d(i, j) = (ad.col(i) - bd.col(j)).norm();
      }
    }
  }
  return d;
}

enum BackPointer : std::uint8_t { kStart = 0, kDiag, kVert, kHorz };

}  // namespace

AlignmentPath dtw_align(const Eigen::Ref<const RowMatrixF>& a,
                        const Eigen::Ref<const RowMatrixF>& b, Metric metric) {
  const int ta = static_cast<int>(a.rows());
  const int tb = static_cast<int>(b.rows());
  if (ta == 0 || tb == 0) throw DataError("dtw_align: empty sequence");
  if (a.cols() != b.cols()) {
    throw DataError("dtw_align: dimension mismatch (" +
                    std::to_string(a.cols()) + " vs " +
                    std::to_string(b.cols()) + ")");
  }

  const RowMatrixD dist = local_distances(a, b, metric);
  RowMatrixD cost(ta, tb);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      back(ta, tb);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ta; ++i) {
    for (int j = 0; j < tb; ++j) {
      if (i == 0 && j == 0) {
        cost(0, 0) = dist(0, 0);
        back(0, 0) = kStart;
        continue;
      }
      const double diag = (i > 0 && j > 0) ? cost(i - 1, j - 1) : kInf;
      const double vert = (i > 0) ? cost(i - 1, j) : kInf;
      const double horz = (j > 0) ? cost(i, j - 1) : kInf;
      double best = diag;
      std::uint8_t ptr = kDiag;
      if (vert < best) {
        best = vert;
        ptr = kVert;
      }
      if (horz < best) {
        best = horz;
        ptr = kHorz;
      }
      cost(i, j) = best + dist(i, j);
      back(i, j) = ptr;
    }
  }

  AlignmentPath path;
  path.cost = cost(ta - 1, tb - 1);
  int i = ta - 1, j = tb - 1;
  path.steps.emplace_back(i, j);
  while (back(i, j) != kStart) {
    switch (back(i, j)) {
      case kDiag:
        --i;
        --j;
        break;
      case kVert:
        --i;
        break;
      default:
        --j;
        break;
    }
    path.steps.emplace_back(i, j);
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return path;
}

double dtw_distance(const Eigen::Ref<const RowMatrixF>& a,
                    const Eigen::Ref<const RowMatrixF>& b, Metric metric,
                    bool normalize) {
  const AlignmentPath path = dtw_align(a, b, metric);
  if (!normalize) return path.cost;
  return path.cost / static_cast<double>(path.length());
}

}  // namespace zr
