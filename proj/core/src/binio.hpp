// core/src/binio.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitive IO for the binary file formats. Reads throw
// DataError on short files so truncation surfaces as a clear message.

#ifndef ZR_SRC_BINIO_HPP
#define ZR_SRC_BINIO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "zr/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace zr::io {

inline void write_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  write_bytes(os, &value, sizeof(T));
}

inline void read_bytes(std::istream& is, void* data, std::size_t n,
                       const std::string& what) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    throw DataError("truncated " + what);
  }
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value;
  read_bytes(is, &value, sizeof(T), what);
  return value;
}

inline void write_string16(std::ostream& os, const std::string& s) {
  if (s.size() > 0xFFFF) throw DataError("string too long for u16 length");
  write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}

inline std::string read_string16(std::istream& is, const std::string& what) {
  const auto len = read_pod<std::uint16_t>(is, what);
  std::string s(len, '\0');
  if (len > 0) read_bytes(is, s.data(), len, what);
  return s;
}

}  // namespace zr::io

#endif  // ZR_SRC_BINIO_HPP
