// tests/test_wav.cpp
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "zr/common.hpp"
#include "zr/wav.hpp"

namespace {

std::string temp_path(const std::string& name) {
  return std::string("zr_test_wav_") + name;
}

void write_raw(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void put_u16(std::string* s, std::uint16_t v) {
  s->push_back(static_cast<char>(v & 0xFF));
  s->push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string* s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Minimal WAV container with a configurable fmt chunk.
std::string make_wav_bytes(std::uint16_t format, std::uint16_t channels,
                           std::uint16_t bits, const std::string& data) {
  std::string s = "RIFF";
  put_u32(&s, 36 + static_cast<std::uint32_t>(data.size()));
  s += "WAVEfmt ";
  put_u32(&s, 16);
  put_u16(&s, format);
  put_u16(&s, channels);
  put_u32(&s, 8000);
  put_u32(&s, 16000);
  put_u16(&s, 2);
  put_u16(&s, bits);
  s += "data";
  put_u32(&s, static_cast<std::uint32_t>(data.size()));
  s += data;
  return s;
}

}  // namespace

TEST_CASE("wav round-trip preserves samples to one quantisation step") {
  const std::string path = temp_path("roundtrip.wav");
  std::vector<float> samples(320);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = 0.8f * std::sin(0.05f * static_cast<float>(i));
  }
  zr::write_wav(path, samples, 16000);
  const zr::WavData back = zr::read_wav(path);
  CHECK(back.sample_rate_hz == 16000);
  REQUIRE(back.samples.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - samples[i]) <= 1.0f / 32768.0f);
  }
  std::remove(path.c_str());
}

TEST_CASE("wav write clips out-of-range samples") {
  const std::string path = temp_path("clip.wav");
  zr::write_wav(path, {2.0f, -2.0f, 0.0f}, 8000);
  const zr::WavData back = zr::read_wav(path);
  REQUIRE(back.samples.size() == 3);
  CHECK(back.samples[0] == doctest::Approx(1.0f - 1.0f / 32768.0f));
  CHECK(back.samples[1] == doctest::Approx(-1.0f));
  CHECK(back.samples[2] == 0.0f);
  std::remove(path.c_str());
}

TEST_CASE("wav reader skips unknown chunks") {
  const std::string path = temp_path("extra.wav");
  std::string data;
  put_u16(&data, 1000);
  put_u16(&data, static_cast<std::uint16_t>(-1000));
  std::string s = "RIFF";
  put_u32(&s, 0);
  s += "WAVE";
  s += "LIST";
  put_u32(&s, 3);
  s += "abc";
  s.push_back('\0');  // odd-sized chunk is padded to a word boundary
  s += "fmt ";
  put_u32(&s, 16);
  put_u16(&s, 1);
  put_u16(&s, 1);
  put_u32(&s, 8000);
  put_u32(&s, 16000);
  put_u16(&s, 2);
  put_u16(&s, 16);
  s += "data";
  put_u32(&s, static_cast<std::uint32_t>(data.size()));
  s += data;
  write_raw(path, s);
  const zr::WavData wav = zr::read_wav(path);
  REQUIRE(wav.samples.size() == 2);
  CHECK(wav.samples[0] == doctest::Approx(1000.0f / 32768.0f));
  CHECK(wav.samples[1] == doctest::Approx(-1000.0f / 32768.0f));
  std::remove(path.c_str());
}

TEST_CASE("wav reader rejects bad input") {
  const std::string path = temp_path("bad.wav");

  SUBCASE("missing file") {
    CHECK_THROWS_AS(zr::read_wav("definitely_not_here.wav"), zr::DataError);
  }
  SUBCASE("not riff") {
    write_raw(path, "JUNKJUNKJUNKJUNK");
    CHECK_THROWS_AS(zr::read_wav(path), zr::DataError);
  }
  SUBCASE("truncated header") {
    write_raw(path, "RI");
    CHECK_THROWS_AS(zr::read_wav(path), zr::DataError);
  }
  SUBCASE("stereo") {
    std::string data(8, '\0');
    write_raw(path, make_wav_bytes(1, 2, 16, data));
    CHECK_THROWS_WITH_AS(zr::read_wav(path),
                         doctest::Contains("stereo/multichannel"),
                         zr::DataError);
  }
  SUBCASE("float encoding") {
    std::string data(8, '\0');
    write_raw(path, make_wav_bytes(3, 1, 32, data));
    CHECK_THROWS_WITH_AS(zr::read_wav(path),
                         doctest::Contains("16-bit PCM"), zr::DataError);
  }
  SUBCASE("eight bit") {
    std::string data(8, '\0');
    write_raw(path, make_wav_bytes(1, 1, 8, data));
    CHECK_THROWS_AS(zr::read_wav(path), zr::DataError);
  }
  SUBCASE("no data chunk") {
    std::string s = "RIFF";
    put_u32(&s, 4);
    s += "WAVE";
    write_raw(path, s);
    CHECK_THROWS_WITH_AS(zr::read_wav(path), doctest::Contains("data chunk"),
                         zr::DataError);
  }
  std::remove(path.c_str());
}

TEST_CASE("wav writes are byte-identical across runs") {
  const std::string p1 = temp_path("det1.wav");
  const std::string p2 = temp_path("det2.wav");
  std::vector<float> samples(100);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = std::sin(0.21f * static_cast<float>(i));
  }
  zr::write_wav(p1, samples, 16000);
  zr::write_wav(p2, samples, 16000);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  CHECK(b1.size() == 44 + 200);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}
