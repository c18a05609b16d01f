// pase/dsp.h

// Copyright 2026  The pase-cpp Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pase {

inline constexpr int kSampleRate = 16000;
inline constexpr int kFrameHop = 160;    // 10 ms
inline constexpr int kFrameLen = 400;    // 25 ms
inline constexpr int kFftSize = 2048;
inline constexpr int kLpsDim = 1025;
inline constexpr int kMfccDim = 20;
inline constexpr int kNumMelFilters = 40;
inline constexpr int kProsodyDim = 4;
inline constexpr int kEmbeddingDim = 100;
inline constexpr double kLogFloor = 1e-10;

// Fixed-length mono waveform segment tied back to its source utterance.
struct AudioChunk {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = kSampleRate;
  std::string utterance_id;
  int64_t offset = 0;  // sample index into the source utterance
};

enum class FeatureKind : uint8_t { kLps = 0, kMfcc = 1, kProsody = 2, kEmbedding = 3 };

int feature_dim(FeatureKind kind);
std::string feature_kind_name(FeatureKind kind);

// N frames x D dims, row-major, with frame timing metadata. Values are kept
// in double precision; the on-disk feature format narrows to float32.
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::kEmbedding;
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;
  double frame_stride_s = 0.010;
  double frame_window_s = 0.025;

  double& at(int64_t r, int64_t c) { return data[r * cols + c]; }
  double at(int64_t r, int64_t c) const { return data[r * cols + c]; }
};

// Validates chunk length (multiple of the hop, at least one window) and
// returns T/hop frames of kFrameLen samples starting at multiples of the
// hop; the tail is reflection-padded. Frames are Hamming-windowed unless
// windowed = false.
std::vector<std::vector<double>> frame_signal(const AudioChunk& chunk,
                                              bool windowed = true);

// Log power spectrum: per frame, kFftSize-point spectrum, bins 0..1024,
// natural log with an absolute floor.
FeatureMatrix lps(const AudioChunk& chunk);

// 20 cepstral coefficients from 40 mel filters over 0..8 kHz
// (orthonormal DCT-II of the log filterbank energies).
FeatureMatrix mfcc(const AudioChunk& chunk);

// Per frame: interpolated log F0, voicing probability, zero-crossing rate,
// RMS energy.
FeatureMatrix prosody(const AudioChunk& chunk);

// Triangular mel filters (HTK mel scale) as rows over FFT bins 0..n_fft/2.
std::vector<std::vector<double>> mel_filterbank(int n_filters, int n_fft,
                                                double sample_rate,
                                                double f_lo, double f_hi);

// Per-dimension train-set statistics for one target kind. Variances are
// floored; the struct is immutable once built.
struct StandardizationStats {
  FeatureKind kind = FeatureKind::kLps;
  std::vector<double> mean;
  std::vector<double> var;
};

// One-pass (Welford) accumulator over feature matrices.
class StatsAccumulator {
 public:
  explicit StatsAccumulator(FeatureKind kind);
  void add(const FeatureMatrix& features);
  int64_t count() const { return count_; }
  StandardizationStats finalize() const;  // rejects an empty accumulation

 private:
  FeatureKind kind_;
  int64_t count_ = 0;
  std::vector<double> mean_, m2_;
};

void standardize(FeatureMatrix* features, const StandardizationStats& stats);
void destandardize(FeatureMatrix* features, const StandardizationStats& stats);

}  // namespace pase
