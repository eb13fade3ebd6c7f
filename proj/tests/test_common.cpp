// tests/test_common.cpp
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdint>
#include <string>

#include "zr/common.hpp"
#include "zr/rng.hpp"

TEST_CASE("format_double emits shortest forms") {
  CHECK(zr::format_double(0.5) == "0.5");
  CHECK(zr::format_double(1.0) == "1");
  CHECK(zr::format_double(0.1) == "0.1");
  CHECK(zr::format_double(1e100) == "1e+100");
  CHECK(zr::format_double(1e-300) == "1e-300");
  CHECK(zr::format_double(123456789.0) == "123456789");
}

TEST_CASE("format_double round-trips exactly") {
  zr::Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    double value = rng.gaussian() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    if (i % 3 == 0) value = -value;
    const std::string text = zr::format_double(value);
    CHECK(std::stod(text) == value);
  }
  CHECK(std::stod(zr::format_double(3.0 / 7.0)) == 3.0 / 7.0);
}

TEST_CASE("fnv1a32 matches reference vectors") {
  CHECK(zr::fnv1a32("") == 0x811C9DC5u);
  CHECK(zr::fnv1a32("a") == 0xE40C292Cu);
  CHECK(zr::fnv1a32("foobar") == 0xBF9CF968u);
  CHECK(zr::fnv1a32(std::string("\0", 1)) != zr::fnv1a32(""));
}

TEST_CASE("row-major matrix aliases") {
  CHECK(zr::RowMatrixF::IsRowMajor);
  CHECK(zr::RowMatrixD::IsRowMajor);
  zr::RowMatrixF m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  // One row must be contiguous in memory.
  CHECK(m.data()[0] == 1.0f);
  CHECK(m.data()[2] == 3.0f);
  CHECK(m.data()[3] == 4.0f);
}

TEST_CASE("error types carry their message") {
  const zr::DataError data_err("bad file");
  CHECK(std::string(data_err.what()) == "bad file");
  const zr::NumericError num_err("diverged");
  CHECK(std::string(num_err.what()) == "diverged");
  CHECK_THROWS_AS(throw zr::DataError("x"), std::runtime_error);
  CHECK_THROWS_AS(throw zr::NumericError("x"), std::runtime_error);
}
