// core/include/zr/wav.hpp
// SPDX-License-Identifier: Apache-2.0

#ifndef ZR_WAV_HPP
#define ZR_WAV_HPP

#include <string>
#include <vector>

namespace zr {

struct WavData {
  std::vector<float> samples;  // mono, scaled to [-1, 1)
  int sample_rate_hz = 0;
};

// Reads 16-bit PCM mono WAV. Stereo or non-PCM input is rejected.
WavData read_wav(const std::string& path);

// Writes 16-bit PCM mono WAV; samples are clipped to [-1, 1).
void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate_hz);

}  // namespace zr

#endif  // ZR_WAV_HPP
