// core/src/wav.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/wav.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "binio.hpp"
#include "zr/common.hpp"

namespace zr {

namespace {

struct ChunkHeader {
  char id[4];
  std::uint32_t size;
};

ChunkHeader read_chunk_header(std::istream& is, const std::string& path) {
  ChunkHeader h;
  io::read_bytes(is, h.id, 4, "WAV file " + path);
  h.size = io::read_pod<std::uint32_t>(is, "WAV file " + path);
  return h;
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open WAV file: " + path);

  char riff[4];
  io::read_bytes(is, riff, 4, "WAV file " + path);
  if (std::memcmp(riff, "RIFF", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }
  io::read_pod<std::uint32_t>(is, "WAV file " + path);  // RIFF size, unused
  char wave[4];
  io::read_bytes(is, wave, 4, "WAV file " + path);
  if (std::memcmp(wave, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  WavData out;

  while (is.peek() != EOF) {
    const ChunkHeader h = read_chunk_header(is, path);
    if (std::memcmp(h.id, "fmt ", 4) == 0) {
      if (h.size < 16) throw DataError("malformed fmt chunk: " + path);
      const auto format = io::read_pod<std::uint16_t>(is, path);
      channels = io::read_pod<std::uint16_t>(is, path);
      sample_rate = io::read_pod<std::uint32_t>(is, path);
      io::read_pod<std::uint32_t>(is, path);  // byte rate
      io::read_pod<std::uint16_t>(is, path);  // block align
      bits = io::read_pod<std::uint16_t>(is, path);
      if (h.size > 16) is.seekg(h.size - 16, std::ios::cur);
      if (format != 1) {
        throw DataError("unsupported WAV encoding (want 16-bit PCM): " + path);
      }
      have_fmt = true;
    } else if (std::memcmp(h.id, "data", 4) == 0) {
      if (!have_fmt) throw DataError("data chunk before fmt chunk: " + path);
      if (channels != 1) {
        throw DataError("stereo/multichannel WAV not supported (" +
                        std::to_string(channels) + " channels): " + path);
      }
      if (bits != 16) {
        throw DataError("only 16-bit PCM WAV is supported: " + path);
      }
      const std::size_t n = h.size / 2;
      std::vector<std::int16_t> raw(n);
      if (n > 0) io::read_bytes(is, raw.data(), n * 2, "WAV data in " + path);
      out.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        out.samples[i] = static_cast<float>(raw[i]) / 32768.0f;
      }
      out.sample_rate_hz = static_cast<int>(sample_rate);
      return out;
    } else {
      // Skip unknown chunks (LIST, fact, ...); chunks are word-aligned.
      is.seekg(h.size + (h.size & 1), std::ios::cur);
    }
  }
  throw DataError("WAV file has no data chunk: " + path);
}

void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate_hz) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write WAV file: " + path);

  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(samples.size() * 2);
  const std::uint32_t sr = static_cast<std::uint32_t>(sample_rate_hz);

  io::write_bytes(os, "RIFF", 4);
  io::write_pod<std::uint32_t>(os, 36 + data_bytes);
  io::write_bytes(os, "WAVE", 4);
  io::write_bytes(os, "fmt ", 4);
  io::write_pod<std::uint32_t>(os, 16);
  io::write_pod<std::uint16_t>(os, 1);  // PCM
  io::write_pod<std::uint16_t>(os, 1);  // mono
  io::write_pod<std::uint32_t>(os, sr);
  io::write_pod<std::uint32_t>(os, sr * 2);
  io::write_pod<std::uint16_t>(os, 2);
  io::write_pod<std::uint16_t>(os, 16);
  io::write_bytes(os, "data", 4);
  io::write_pod<std::uint32_t>(os, data_bytes);
  for (float s : samples) {
    const float clipped = std::clamp(s, -1.0f, 1.0f - 1.0f / 32768.0f);
    const auto v = static_cast<std::int16_t>(std::lrintf(clipped * 32768.0f));
    io::write_pod<std::int16_t>(os, v);
  }
  if (!os) throw DataError("failed writing WAV file: " + path);
}

}  // namespace zr
