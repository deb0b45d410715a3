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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "slt/audio/features.h"
#include "slt/error.h"

namespace slt {
namespace {

Waveform Tone(double hz, int samples, double amplitude = 0.5) {
  Waveform wave;
  wave.samples.resize(samples);
  for (int i = 0; i < samples; ++i)
    wave.samples[i] = amplitude * std::sin(2 * std::numbers::pi * hz * i / wave.sample_rate);
  return wave;
}

TEST(FftTest, InverseRoundTripAndParseval) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> dist;
  for (int log_n = 0; log_n <= 10; ++log_n) {
    const std::size_t n = std::size_t{1} << log_n;
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {dist(rng), dist(rng)};
    auto spectrum = x;
    Fft(spectrum);
    double energy_time = 0, energy_freq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      energy_time += std::norm(x[i]);
      energy_freq += std::norm(spectrum[i]);
    }
    EXPECT_NEAR(energy_freq / n, energy_time, 1e-6 * energy_time);
    Fft(spectrum, true);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(spectrum[i] - x[i]), 1e-9);
  }
  std::vector<std::complex<double>> bad(6);
  EXPECT_THROW(Fft(bad), Error);
}

TEST(FftTest, MatchesDirectDft) {
  std::vector<std::complex<double>> x = {{1, 0}, {2, -1}, {0, 3}, {-1, 0.5},
                                         {0.25, 0}, {0, 0}, {4, 1}, {-2, -2}};
  auto fast = x;
  Fft(fast);
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::complex<double> sum = 0;
    for (std::size_t n = 0; n < x.size(); ++n)
      sum += x[n] * std::polar(1.0, -2 * std::numbers::pi * k * n / x.size());
    EXPECT_LT(std::abs(sum - fast[k]), 1e-12);
  }
}

TEST(MelTest, HtkScale) {
  EXPECT_NEAR(HzToMel(700.0), 2595.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(MelToHz(HzToMel(1234.5)), 1234.5, 1e-9);
}

TEST(MelTest, ToneDominatesItsFilter) {
  MelOptions options;
  for (int k : {25, 40, 55, 70, 79}) {
    const double hz = MelCenterHz(options, 16000, k);
    FeatureMatrix mel = MelSpectrogram(Tone(hz, 4000), options);
    ASSERT_EQ(mel.dim, 80);
    for (int t = 0; t < mel.frames; ++t) {
      int best = 0;
      for (int m = 1; m < mel.dim; ++m)
        if (mel.at(t, m) > mel.at(t, best)) best = m;
      EXPECT_EQ(best, k) << "frame " << t << " tone " << hz << " Hz";
    }
  }
}

TEST(MelTest, SilenceIsLogFloor) {
  Waveform silence;
  silence.samples.assign(1600, 0.0);
  FeatureMatrix mel = MelSpectrogram(silence);
  EXPECT_EQ(mel.frames, 1 + (1600 - 400) / 160);
  for (double v : mel.data) EXPECT_DOUBLE_EQ(v, std::log(1e-10));
}

TEST(MelTest, ShortWaveIsAnError) {
  Waveform tiny;
  tiny.samples.assign(399, 0.1);
  EXPECT_THROW(MelSpectrogram(tiny), Error);
}

TEST(MelTest, OneFrameShiftShiftsFeatures) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.1);
  Waveform wave = Tone(440.0, 8000);
  for (double& s : wave.samples) s += noise(rng);
  Waveform shifted = wave;
  shifted.samples.insert(shifted.samples.begin(), 160, 0.0);
  FeatureMatrix a = MelSpectrogram(wave);
  FeatureMatrix b = MelSpectrogram(shifted);
  ASSERT_EQ(b.frames, a.frames + 1);
  for (int t = 0; t < a.frames; ++t)
    for (int m = 0; m < a.dim; ++m) EXPECT_NEAR(b.at(t + 1, m), a.at(t, m), 1e-5);
}

FeatureMatrix Synthetic(int frames, int dim, const std::function<double(int, int)>& f) {
  FeatureMatrix m;
  m.frames = frames;
  m.dim = dim;
  m.data.resize(static_cast<std::size_t>(frames) * dim);
  for (int t = 0; t < frames; ++t)
    for (int d = 0; d < dim; ++d) m.at(t, d) = f(t, d);
  return m;
}

TEST(DeltaTest, ConstantInputHasZeroDeltas) {
  FeatureMatrix out = AddDeltas(Synthetic(12, 80, [](int, int d) { return 0.3 * d - 2; }));
  ASSERT_EQ(out.dim, 240);
  for (int t = 0; t < 12; ++t)
    for (int d = 80; d < 240; ++d) EXPECT_EQ(out.at(t, d), 0.0);
}

TEST(DeltaTest, LinearInputHasSlopeDeltas) {
  const double c = 1.75;
  FeatureMatrix out = AddDeltas(Synthetic(10, 3, [&](int t, int) { return c * t; }));
  for (int t = 2; t < 8; ++t)
    for (int d = 0; d < 3; ++d) {
      EXPECT_NEAR(out.at(t, 3 + d), c, 1e-12);
      EXPECT_EQ(out.at(t, d), c * t);
    }
}

TEST(DeltaTest, SingleFrameCollapses) {
  FeatureMatrix out = AddDeltas(Synthetic(1, 4, [](int, int d) { return d; }));
  for (int d = 4; d < 12; ++d) EXPECT_EQ(out.at(0, d), 0.0);
}

TEST(CmvnTest, NormalisesEveryDimension) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> dist(3.0, 5.0);
  FeatureMatrix in = Synthetic(37, 6, [&](int, int d) { return d == 4 ? 7.0 : dist(rng); });
  FeatureMatrix out = Cmvn(in);
  for (int d = 0; d < 6; ++d) {
    double mean = 0, var = 0;
    for (int t = 0; t < 37; ++t) mean += out.at(t, d);
    mean /= 37;
    for (int t = 0; t < 37; ++t) var += std::pow(out.at(t, d) - mean, 2);
    var /= 37;
    EXPECT_LT(std::abs(mean), 1e-6);
    if (d == 4) {
      for (int t = 0; t < 37; ++t) EXPECT_EQ(out.at(t, d), 0.0);
    } else {
      EXPECT_LT(std::abs(var - 1.0), 1e-5);
    }
  }
  FeatureMatrix twice = Cmvn(out);
  for (std::size_t i = 0; i < out.data.size(); ++i) EXPECT_NEAR(twice.data[i], out.data[i], 1e-6);
}

TEST(PipelineTest, ReferenceConfigurationIs240Wide) {
  FeatureMatrix f = ExtractFeatures(Tone(1000.0, 16000));
  EXPECT_EQ(f.dim, 240);
  EXPECT_EQ(f.frames, 98);
  EXPECT_TRUE(f.normalized);
  EXPECT_EQ(f.kind, FeatureKind::kLogMelDeltas);
}

TEST(IoTest, WavAndFeatureDumpRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "slt_audio_test";
  std::filesystem::create_directories(dir);
  Waveform wave = Tone(300.0, 1234, 0.8);
  WriteWav((dir / "a.wav").string(), wave);
  Waveform back = ReadWav((dir / "a.wav").string());
  ASSERT_EQ(back.samples.size(), wave.samples.size());
  EXPECT_EQ(back.sample_rate, 16000);
  for (std::size_t i = 0; i < wave.samples.size(); ++i)
    EXPECT_NEAR(back.samples[i], wave.samples[i], 1.0 / 32768);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.wav"), 44u + 2 * 1234);

  FeatureMatrix f = ExtractFeatures(wave);
  WriteFeatureMatrix((dir / "a.feat").string(), f);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.feat"), 8u + 4u * f.data.size());
  FeatureMatrix g = ReadFeatureMatrix((dir / "a.feat").string());
  EXPECT_EQ(g.frames, f.frames);
  EXPECT_EQ(g.dim, f.dim);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    EXPECT_EQ(g.data[i], static_cast<double>(static_cast<float>(f.data[i])));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace slt
