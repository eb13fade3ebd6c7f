// core/include/zr/common.hpp
// SPDX-License-Identifier: Apache-2.0

#ifndef ZR_COMMON_HPP
#define ZR_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace zr {

// Feature matrices are stored row-major so that one row is one frame and a
// contiguous [start, end) frame range can be viewed without copying.
using RowMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Malformed or inconsistent input data (files, ids, bounds). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric check failures (gradient checks, non-finite values). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shortest round-trip decimal text for a double. Used everywhere a float
// lands in a text file so that reruns are byte-identical.
std::string format_double(double value);

// FNV-1a over a byte string; stable across platforms.
std::uint32_t fnv1a32(const std::string& bytes);

}  // namespace zr

#endif  // ZR_COMMON_HPP
