// tests/test_models.cpp
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

TEST_CASE("placeholder") { CHECK(true); }
