// core/src/features.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/features.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

#include "binio.hpp"

namespace zr {

namespace {

constexpr char kArchiveMagic[6] = {'Z', 'R', 'F', 'A', '1', '\0'};

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

struct MelFilterbank {
  // One row of (bin, weight) pairs per filter.
  std::vector<std::vector<std::pair<int, double>>> filters;
  std::vector<double> center_hz;
};

MelFilterbank build_filterbank(int num_filters, int nfft, int sample_rate_hz) {
  MelFilterbank fb;
  const int nbins = nfft / 2 + 1;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> edges_hz(num_filters + 2);
  for (int m = 0; m < num_filters + 2; ++m) {
    const double mel =
        mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) / (num_filters + 1);
    edges_hz[m] = mel_to_hz(mel);
  }
  fb.filters.resize(num_filters);
  fb.center_hz.resize(num_filters);
  const double bin_hz = static_cast<double>(sample_rate_hz) / nfft;
  for (int m = 0; m < num_filters; ++m) {
    const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
    fb.center_hz[m] = mid;
    for (int k = 0; k < nbins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f < mid) {
        w = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      if (w > 0.0) fb.filters[m].emplace_back(k, w);
    }
  }
  return fb;
}

std::vector<double> hamming_window(int length) {
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n /
                                  static_cast<double>(length - 1));
  }
  return w;
}

// Power spectrum of one windowed frame, zero-padded to nfft.
std::vector<double> power_spectrum(const std::vector<double>& windowed,
                                   int nfft) {
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < windowed.size(); ++i) buf[i] = windowed[i];
  fft_radix2(buf);
  std::vector<double> power(nfft / 2 + 1);
  for (int k = 0; k <= nfft / 2; ++k) power[k] = std::norm(buf[k]);
  return power;
}

std::vector<double> filterbank_log_energies(const std::vector<double>& power,
                                            const MelFilterbank& fb,
                                            double log_floor) {
  std::vector<double> log_e(fb.filters.size());
  for (std::size_t m = 0; m < fb.filters.size(); ++m) {
    double e = 0.0;
    for (const auto& [bin, weight] : fb.filters[m]) e += weight * power[bin];
    log_e[m] = std::log(std::max(e, log_floor));
  }
  return log_e;
}

}  // namespace

const std::string& SpeakerMap::speaker_of(
    const std::string& utterance_id) const {
  const auto it = entries_.find(utterance_id);
  if (it == entries_.end()) {
    throw DataError("no speaker entry for utterance '" + utterance_id + "'");
  }
  return it->second;
}

SpeakerMap read_speaker_map(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open speaker map: " + path);
  SpeakerMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw DataError("malformed speaker map line " + std::to_string(line_no) +
                      " in " + path);
    }
    map.set(line.substr(0, tab), line.substr(tab + 1));
  }
  return map;
}

void write_speaker_map(const SpeakerMap& map, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write speaker map: " + path);
  for (const auto& [utt, spk] : map.entries()) os << utt << '\t' << spk << '\n';
}

FeatureSet::FeatureSet(std::vector<FeatureSequence> sequences) {
  for (auto& s : sequences) add(std::move(s));
}

void FeatureSet::add(FeatureSequence seq) {
  if (index_.count(seq.utterance_id)) {
    throw DataError("duplicate utterance id '" + seq.utterance_id + "'");
  }
  index_[seq.utterance_id] = sequences_.size();
  sequences_.push_back(std::move(seq));
}

const FeatureSequence& FeatureSet::at(const std::string& utterance_id) const {
  const auto it = index_.find(utterance_id);
  if (it == index_.end()) {
    throw DataError("unknown utterance '" + utterance_id + "'");
  }
  return sequences_[it->second];
}

std::vector<double> log_mel_energies(const std::vector<float>& frame,
                                     int sample_rate_hz,
                                     const MfccConfig& config) {
  const int window = static_cast<int>(frame.size());
  const int nfft = next_pow2(window);
  const auto fb = build_filterbank(config.num_filters, nfft, sample_rate_hz);
  const auto ham = hamming_window(window);
  std::vector<double> windowed(window);
  for (int n = 0; n < window; ++n) windowed[n] = frame[n] * ham[n];
  return filterbank_log_energies(power_spectrum(windowed, nfft), fb,
                                 config.log_floor);
}

FeatureSequence compute_mfcc(const std::vector<float>& samples,
                             int sample_rate_hz,
                             const std::string& utterance_id,
                             const MfccConfig& config) {
  if (sample_rate_hz < 8000) {
    throw DataError("sample rate must be at least 8000 Hz, got " +
                    std::to_string(sample_rate_hz));
  }
  const int window =
      static_cast<int>(std::lround(config.window_ms * 1e-3 * sample_rate_hz));
  const int hop =
      static_cast<int>(std::lround(config.hop_ms * 1e-3 * sample_rate_hz));
  const int n = static_cast<int>(samples.size());
  if (n < window) {
    throw DataError("utterance too short: '" + utterance_id + "' has " +
                    std::to_string(n) + " samples, window is " +
                    std::to_string(window));
  }
  for (float s : samples) {
    if (!std::isfinite(s)) {
      throw DataError("non-finite sample in utterance '" + utterance_id + "'");
    }
  }

  std::vector<double> emphasized(n);
  emphasized[0] = samples[0];
  for (int t = 1; t < n; ++t) {
    emphasized[t] = samples[t] - config.preemphasis * samples[t - 1];
  }

  const int num_frames = (n - window) / hop + 1;
  const int nfft = next_pow2(window);
  const auto fb = build_filterbank(config.num_filters, nfft, sample_rate_hz);
  const auto ham = hamming_window(window);

  // Orthonormal DCT-II basis: rows are cepstral indices, columns filters.
  const int M = config.num_filters;
  RowMatrixD dct(config.num_ceps, M);
  for (int k = 0; k < config.num_ceps; ++k) {
    const double scale =
        std::sqrt(2.0 / M) * (k == 0 ? 1.0 / std::numbers::sqrt2 : 1.0);
    for (int m = 0; m < M; ++m) {
      dct(k, m) =
          scale * std::cos(std::numbers::pi * k * (2 * m + 1) / (2.0 * M));
    }
  }

  FeatureSequence out;
  out.utterance_id = utterance_id;
  out.frames.resize(num_frames, config.num_ceps);
  out.frame_rate_hz = 100.0f;

  std::vector<double> windowed(window);
  for (int f = 0; f < num_frames; ++f) {
    const int start = f * hop;
    for (int i = 0; i < window; ++i) {
      windowed[i] = emphasized[start + i] * ham[i];
    }
    const auto log_e =
        filterbank_log_energies(power_spectrum(windowed, nfft), fb,
                                config.log_floor);
    for (int k = 0; k < config.num_ceps; ++k) {
      double c = 0.0;
      for (int m = 0; m < M; ++m) c += dct(k, m) * log_e[m];
      out.frames(f, k) = static_cast<float>(c);
    }
  }
  return out;
}

std::vector<FeatureSequence> apply_cmvn(
    const std::vector<FeatureSequence>& sequences, const SpeakerMap& speakers,
    CmvnGrouping grouping) {
  if (sequences.empty()) return {};
  const int dim = sequences.front().dim();

  struct Stats {
    Eigen::VectorXd sum, sumsq;
    std::int64_t count = 0;
  };
  std::map<std::string, Stats> stats;

  auto group_of = [&](const FeatureSequence& seq) -> std::string {
    if (grouping == CmvnGrouping::kUtterance) return seq.utterance_id;
    return speakers.speaker_of(seq.utterance_id);
  };

  for (const auto& seq : sequences) {
    if (seq.dim() != dim) {
      throw DataError("dimension mismatch in CMVN input: '" +
                      seq.utterance_id + "'");
    }
    auto& s = stats[group_of(seq)];
    if (s.count == 0) {
      s.sum = Eigen::VectorXd::Zero(dim);
      s.sumsq = Eigen::VectorXd::Zero(dim);
    }
    for (int t = 0; t < seq.num_frames(); ++t) {
      for (int d = 0; d < dim; ++d) {
        const double v = seq.frames(t, d);
        s.sum[d] += v;
        s.sumsq[d] += v * v;
      }
    }
    s.count += seq.num_frames();
  }

  constexpr double kVarianceFloor = 1e-8;
  std::map<std::string, std::pair<Eigen::VectorXd, Eigen::VectorXd>> norm;
  for (auto& [group, s] : stats) {
    Eigen::VectorXd mean = s.sum / static_cast<double>(s.count);
    Eigen::VectorXd var =
        (s.sumsq / static_cast<double>(s.count) - mean.cwiseProduct(mean))
            .cwiseMax(0.0)
            .cwiseMax(kVarianceFloor);
    norm[group] = {mean, var.cwiseSqrt()};
  }

  std::vector<FeatureSequence> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    const auto& [mean, sd] = norm.at(group_of(seq));
    FeatureSequence r;
    r.utterance_id = seq.utterance_id;
    r.frame_rate_hz = seq.frame_rate_hz;
    r.frames.resize(seq.num_frames(), dim);
    for (int t = 0; t < seq.num_frames(); ++t) {
      for (int d = 0; d < dim; ++d) {
        r.frames(t, d) =
            static_cast<float>((seq.frames(t, d) - mean[d]) / sd[d]);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

FeatureSequence add_deltas(const FeatureSequence& seq) {
  const int T = seq.num_frames();
  const int D = seq.dim();
  if (T < 1) throw DataError("empty sequence in add_deltas");

  auto clamp_row = [T](int t) { return std::min(std::max(t, 0), T - 1); };
  // Regression deltas with window 2: denominator 2 * (1^2 + 2^2) = 10.
  auto regress = [&](const RowMatrixD& src, RowMatrixD& dst) {
    for (int t = 0; t < T; ++t) {
      for (int d = 0; d < D; ++d) {
        double num = 0.0;
        for (int w = 1; w <= 2; ++w) {
          num += w * (src(clamp_row(t + w), d) - src(clamp_row(t - w), d));
        }
        dst(t, d) = num / 10.0;
      }
    }
  };

  RowMatrixD statics = seq.frames.cast<double>();
  RowMatrixD delta(T, D), delta2(T, D);
  regress(statics, delta);
  regress(delta, delta2);

  FeatureSequence out;
  out.utterance_id = seq.utterance_id;
  out.frame_rate_hz = seq.frame_rate_hz;
  out.frames.resize(T, 3 * D);
  out.frames.leftCols(D) = seq.frames;
  out.frames.middleCols(D, D) = delta.cast<float>();
  out.frames.rightCols(D) = delta2.cast<float>();
  return out;
}

void write_archive(const std::vector<FeatureSequence>& sequences,
                   const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write feature archive: " + path);
  io::write_bytes(os, kArchiveMagic, sizeof(kArchiveMagic));
  io::write_pod<std::uint32_t>(os,
                               static_cast<std::uint32_t>(sequences.size()));
  for (const auto& seq : sequences) {
    if (seq.num_frames() < 1 || seq.dim() < 1) {
      throw DataError("refusing to write empty sequence '" +
                      seq.utterance_id + "'");
    }
    io::write_string16(os, seq.utterance_id);
    io::write_pod<std::uint32_t>(os,
                                 static_cast<std::uint32_t>(seq.num_frames()));
    io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(seq.dim()));
    io::write_pod<float>(os, seq.frame_rate_hz);
    io::write_bytes(os, seq.frames.data(),
                    sizeof(float) * seq.frames.size());
  }
  if (!os) throw DataError("failed writing feature archive: " + path);
}

std::vector<FeatureSequence> read_archive(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open feature archive: " + path);
  char magic[6];
  io::read_bytes(is, magic, sizeof(magic), "feature archive " + path);
  if (std::memcmp(magic, kArchiveMagic, sizeof(magic)) != 0) {
    throw DataError("not a feature archive: " + path);
  }
  const auto count =
      io::read_pod<std::uint32_t>(is, "feature archive " + path);
  std::vector<FeatureSequence> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureSequence seq;
    seq.utterance_id = io::read_string16(is, "feature archive " + path);
    const auto T = io::read_pod<std::uint32_t>(is, "feature archive " + path);
    const auto D = io::read_pod<std::uint32_t>(is, "feature archive " + path);
    seq.frame_rate_hz = io::read_pod<float>(is, "feature archive " + path);
    if (T < 1 || D < 1) {
      throw DataError("invalid record shape in feature archive: " + path);
    }
    seq.frames.resize(T, D);
    io::read_bytes(is, seq.frames.data(), sizeof(float) * seq.frames.size(),
                   "feature archive " + path);
    if (!seq.frames.allFinite()) {
      throw DataError("non-finite frame values in record '" +
                      seq.utterance_id + "' of " + path);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace zr
