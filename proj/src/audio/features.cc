// Copyright 2026 The JointSLT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slt/audio/features.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "slt/error.h"

namespace slt {
namespace {

template <typename Int>
void WriteLe(std::ostream& out, Int value) {
  unsigned char bytes[sizeof(Int)];
  for (std::size_t i = 0; i < sizeof(Int); ++i)
    bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(Int));
}

template <typename Int>
Int ReadLe(std::istream& in) {
  unsigned char bytes[sizeof(Int)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(Int))) throw Error("unexpected end of file");
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(Int); ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<Int>(value);
}

// Filter weights over FFT bins, one row per mel filter.
std::vector<std::vector<double>> MelFilterbank(const MelOptions& options,
                                               int sample_rate, int fft_size) {
  const int bins = fft_size / 2 + 1;
  const double max_mel = HzToMel(sample_rate / 2.0);
  const double step = max_mel / (options.num_mels + 1);
  std::vector<std::vector<double>> weights(options.num_mels, std::vector<double>(bins, 0.0));
  for (int m = 0; m < options.num_mels; ++m) {
    const double left = m * step, center = (m + 1) * step, right = (m + 2) * step;
    for (int b = 0; b < bins; ++b) {
      const double mel = HzToMel(static_cast<double>(b) * sample_rate / fft_size);
      if (mel > left && mel <= center) {
        weights[m][b] = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        weights[m][b] = (right - mel) / (right - center);
      }
    }
  }
  return weights;
}

}  // namespace

void Fft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n)) {
    throw Error("FFT size " + std::to_string(n) + " is not a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2 * std::numbers::pi / len * (inverse ? 1 : -1);
    const std::complex<double> root(std::cos(angle), std::sin(angle));
    for (std::size_t start = 0; start < n; start += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = data[start + k];
        const auto v = data[start + k + len / 2] * w;
        data[start + k] = u + v;
        data[start + k + len / 2] = u - v;
        w *= root;
      }
    }
  }
  if (inverse) {
    for (auto& x : data) x /= static_cast<double>(n);
  }
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double MelCenterHz(const MelOptions& options, int sample_rate, int index) {
  const double step = HzToMel(sample_rate / 2.0) / (options.num_mels + 1);
  return MelToHz((index + 1) * step);
}

FeatureMatrix MelSpectrogram(const Waveform& wave, const MelOptions& options) {
  const int frame_length =
      static_cast<int>(std::lround(options.frame_length_ms * wave.sample_rate / 1000.0));
  const int frame_shift =
      static_cast<int>(std::lround(options.frame_shift_ms * wave.sample_rate / 1000.0));
  if (static_cast<int>(wave.samples.size()) < frame_length) {
    throw Error("waveform of " + std::to_string(wave.samples.size()) +
                " samples is shorter than one frame (" + std::to_string(frame_length) + ")");
  }
  for (double s : wave.samples) {
    if (!std::isfinite(s)) throw NumericError("waveform sample");
  }
  const int fft_size = static_cast<int>(std::bit_ceil(static_cast<unsigned>(frame_length)));
  const auto filters = MelFilterbank(options, wave.sample_rate, fft_size);
  std::vector<double> window(frame_length);
  for (int i = 0; i < frame_length; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / (frame_length - 1));

  FeatureMatrix out;
  out.frames = 1 + (static_cast<int>(wave.samples.size()) - frame_length) / frame_shift;
  out.dim = options.num_mels;
  out.frame_shift = options.frame_shift_ms / 1000.0;
  out.kind = FeatureKind::kLogMel;
  out.data.resize(static_cast<std::size_t>(out.frames) * out.dim);

  std::vector<double> frame(frame_length);
  std::vector<std::complex<double>> spectrum(fft_size);
  std::vector<double> power(fft_size / 2 + 1);
  for (int t = 0; t < out.frames; ++t) {
    const double* src = wave.samples.data() + static_cast<std::size_t>(t) * frame_shift;
    for (int i = frame_length - 1; i > 0; --i)
      frame[i] = src[i] - options.preemphasis * src[i - 1];
    frame[0] = src[0] - options.preemphasis * src[0];
    std::fill(spectrum.begin(), spectrum.end(), std::complex<double>(0.0));
    for (int i = 0; i < frame_length; ++i) spectrum[i] = frame[i] * window[i];
    Fft(spectrum);
    for (std::size_t b = 0; b < power.size(); ++b) power[b] = std::norm(spectrum[b]);
    for (int m = 0; m < out.dim; ++m) {
      double energy = 0;
      for (std::size_t b = 0; b < power.size(); ++b) energy += filters[m][b] * power[b];
      out.at(t, m) = std::log(std::max(energy, options.log_floor));
    }
  }
  return out;
}

FeatureMatrix AddDeltas(const FeatureMatrix& features, int window) {
  if (features.frames < 1) throw Error("deltas need at least one frame");
  if (features.kind != FeatureKind::kLogMel) throw Error("deltas already present");
  const int frames = features.frames, dim = features.dim;
  double denom = 0;
  for (int n = 1; n <= window; ++n) denom += 2.0 * n * n;
  auto regress = [&](const std::vector<double>& x) {
    std::vector<double> d(x.size(), 0.0);
    for (int t = 0; t < frames; ++t) {
      for (int n = 1; n <= window; ++n) {
        const int ahead = std::min(t + n, frames - 1);
        const int behind = std::max(t - n, 0);
        for (int k = 0; k < dim; ++k)
          d[static_cast<std::size_t>(t) * dim + k] +=
              n * (x[static_cast<std::size_t>(ahead) * dim + k] -
                   x[static_cast<std::size_t>(behind) * dim + k]);
      }
    }
    for (double& v : d) v /= denom;
    return d;
  };
  const std::vector<double> delta = regress(features.data);
  const std::vector<double> delta2 = regress(delta);
  FeatureMatrix out = features;
  out.dim = 3 * dim;
  out.kind = FeatureKind::kLogMelDeltas;
  out.data.assign(static_cast<std::size_t>(frames) * out.dim, 0.0);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < dim; ++k) {
      const std::size_t src = static_cast<std::size_t>(t) * dim + k;
      out.at(t, k) = features.data[src];
      out.at(t, dim + k) = delta[src];
      out.at(t, 2 * dim + k) = delta2[src];
    }
  }
  return out;
}

FeatureMatrix Cmvn(const FeatureMatrix& features) {
  FeatureMatrix out = features;
  out.normalized = true;
  for (int k = 0; k < features.dim; ++k) {
    double mean = 0;
    for (int t = 0; t < features.frames; ++t) mean += features.at(t, k);
    mean /= features.frames;
    double var = 0;
    for (int t = 0; t < features.frames; ++t) var += std::pow(features.at(t, k) - mean, 2);
    var /= features.frames;
    const double scale = var < 1e-8 ? 0.0 : 1.0 / std::sqrt(var);
    for (int t = 0; t < features.frames; ++t) out.at(t, k) = (features.at(t, k) - mean) * scale;
  }
  return out;
}

FeatureMatrix ExtractFeatures(const Waveform& wave, const MelOptions& options) {
  return Cmvn(AddDeltas(MelSpectrogram(wave, options)));
}

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  char tag[4];
  auto expect = [&](const char* what) {
    if (!in.read(tag, 4) || std::memcmp(tag, what, 4) != 0)
      throw Error(path + ": expected '" + what + "' chunk");
  };
  expect("RIFF");
  ReadLe<std::uint32_t>(in);
  expect("WAVE");
  Waveform wave;
  bool have_format = false;
  while (in.read(tag, 4)) {
    const auto size = ReadLe<std::uint32_t>(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const auto format = ReadLe<std::uint16_t>(in);
      const auto channels = ReadLe<std::uint16_t>(in);
      wave.sample_rate = static_cast<int>(ReadLe<std::uint32_t>(in));
      ReadLe<std::uint32_t>(in);
      ReadLe<std::uint16_t>(in);
      const auto bits = ReadLe<std::uint16_t>(in);
      if (format != 1 || channels != 1 || bits != 16)
        throw Error(path + ": only mono 16-bit PCM is supported");
      in.ignore(size - 16);
      have_format = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_format) throw Error(path + ": data chunk before fmt chunk");
      wave.samples.resize(size / 2);
      for (auto& s : wave.samples) s = static_cast<std::int16_t>(ReadLe<std::uint16_t>(in)) / 32768.0;
      return wave;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  throw Error(path + ": no data chunk");
}

void WriteWav(const std::string& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  WriteLe<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  WriteLe<std::uint32_t>(out, 16);
  WriteLe<std::uint16_t>(out, 1);
  WriteLe<std::uint16_t>(out, 1);
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate));
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate * 2));
  WriteLe<std::uint16_t>(out, 2);
  WriteLe<std::uint16_t>(out, 16);
  out.write("data", 4);
  WriteLe<std::uint32_t>(out, data_bytes);
  for (double s : wave.samples) {
    const double clipped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    WriteLe<std::uint16_t>(out, static_cast<std::uint16_t>(
                                    static_cast<std::int16_t>(std::lround(clipped * 32768.0))));
  }
}

void WriteFeatureMatrix(const std::string& path, const FeatureMatrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(features.frames));
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(features.dim));
  for (double v : features.data) {
    WriteLe<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
}

FeatureMatrix ReadFeatureMatrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  FeatureMatrix features;
  features.frames = static_cast<int>(ReadLe<std::uint32_t>(in));
  features.dim = static_cast<int>(ReadLe<std::uint32_t>(in));
  features.kind = features.dim % 3 == 0 ? FeatureKind::kLogMelDeltas : FeatureKind::kLogMel;
  features.data.resize(static_cast<std::size_t>(features.frames) * features.dim);
  for (double& v : features.data) v = std::bit_cast<float>(ReadLe<std::uint32_t>(in));
  return features;
}

}  // namespace slt
