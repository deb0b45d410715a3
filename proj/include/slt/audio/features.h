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

#ifndef SLT_AUDIO_FEATURES_H_
#define SLT_AUDIO_FEATURES_H_

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace slt {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

enum class FeatureKind { kLogMel, kLogMelDeltas };

// Row-major T x D matrix of frame features.
struct FeatureMatrix {
  int frames = 0;
  int dim = 0;
  double frame_shift = 0.01;  // seconds
  FeatureKind kind = FeatureKind::kLogMel;
  bool normalized = false;
  std::vector<double> data;

  double at(int t, int d) const { return data[static_cast<std::size_t>(t) * dim + d]; }
  double& at(int t, int d) { return data[static_cast<std::size_t>(t) * dim + d]; }
};

struct MelOptions {
  int num_mels = 80;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double preemphasis = 0.97;
  double log_floor = 1e-10;
};

// In-place radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>>& data, bool inverse = false);

double HzToMel(double hz);  // HTK: 2595 log10(1 + f / 700)
double MelToHz(double mel);

// Centre frequency (Hz) of mel filter `index` for the given configuration.
double MelCenterHz(const MelOptions& options, int sample_rate, int index);

// Per frame: pre-emphasis, Hann window, power spectrum through a zero-padded
// radix-2 FFT, triangular HTK-mel filters spanning 0 Hz..Nyquist, natural
// log with a floor. Frames are taken without edge padding.
FeatureMatrix MelSpectrogram(const Waveform& wave, const MelOptions& options = {});

// Appends regression deltas and delta-deltas: output is [static | d | dd].
FeatureMatrix AddDeltas(const FeatureMatrix& features, int window = 2);

// Per-dimension mean/variance normalisation over the segment. Dimensions
// with variance below 1e-8 map to zero.
FeatureMatrix Cmvn(const FeatureMatrix& features);

// MelSpectrogram -> AddDeltas -> Cmvn (80 mels give D = 240).
FeatureMatrix ExtractFeatures(const Waveform& wave, const MelOptions& options = {});

// Mono 16-bit PCM RIFF/WAVE.
Waveform ReadWav(const std::string& path);
void WriteWav(const std::string& path, const Waveform& wave);

// Feature dump: little-endian uint32 T, uint32 D, then T*D float32 values in
// row-major order.
void WriteFeatureMatrix(const std::string& path, const FeatureMatrix& features);
FeatureMatrix ReadFeatureMatrix(const std::string& path);

}  // namespace slt

#endif  // SLT_AUDIO_FEATURES_H_
