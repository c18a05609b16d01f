// pase/dsp.cc

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

#include "pase/dsp.h"

#include <algorithm>
#include <cmath>

#include "pase/common.h"
#include "pase/fft.h"

namespace pase {

namespace {

constexpr int kF0LagMin = 32;   // 500 Hz
constexpr int kF0LagMax = 400;  // 40 Hz
constexpr int kF0Window = 800;  // autocorrelation window per frame
constexpr double kVoicingThreshold = 0.35;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

void validate_chunk(const AudioChunk& chunk) {
  check_arg(chunk.sample_rate == kSampleRate,
            "chunk: sample rate must be " + std::to_string(kSampleRate));
  check_arg(static_cast<int64_t>(chunk.samples.size()) % kFrameHop == 0,
            "chunk: length must be a multiple of " + std::to_string(kFrameHop));
  check_arg(static_cast<int64_t>(chunk.samples.size()) >= kFrameLen,
            "chunk: shorter than one analysis window");
}

// Reflection indexing into [0, n): mirrors without repeating the edge sample.
int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

FeatureMatrix make_matrix(FeatureKind kind, int64_t rows) {
  FeatureMatrix m;
  m.kind = kind;
  m.rows = rows;
  m.cols = feature_dim(kind);
  m.data.assign(m.rows * m.cols, 0.0);
  return m;
}

// Raw (unwindowed) frame of given length centered like frame i of the
// standard grid, reflection-padded at the chunk edges.
std::vector<double> centered_frame(const AudioChunk& chunk, int64_t frame,
                                   int64_t length) {
  const int64_t n = static_cast<int64_t>(chunk.samples.size());
  const int64_t center = frame * kFrameHop + kFrameLen / 2;
  std::vector<double> out(length);
  for (int64_t j = 0; j < length; ++j) {
    out[j] = chunk.samples[reflect_index(center - length / 2 + j, n)];
  }
  return out;
}

}  // namespace

int feature_dim(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kLps:
      return kLpsDim;
    case FeatureKind::kMfcc:
      return kMfccDim;
    case FeatureKind::kProsody:
      return kProsodyDim;
    case FeatureKind::kEmbedding:
      return kEmbeddingDim;
  }
  return 0;
}

std::string feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kLps:
      return "LPS";
    case FeatureKind::kMfcc:
      return "MFCC";
    case FeatureKind::kProsody:
      return "PROSODY";
    case FeatureKind::kEmbedding:
      return "EMBEDDING";
  }
  return "?";
}

std::vector<std::vector<double>> frame_signal(const AudioChunk& chunk,
                                              bool windowed) {
  validate_chunk(chunk);
  const int64_t n = static_cast<int64_t>(chunk.samples.size());
  const int64_t frames = n / kFrameHop;

  static const std::vector<double> hamming = [] {
    std::vector<double> w(kFrameLen);
    for (int i = 0; i < kFrameLen; ++i) {
      w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (kFrameLen - 1));
    }
    return w;
  }();

  std::vector<std::vector<double>> out(frames);
  for (int64_t f = 0; f < frames; ++f) {
    auto& frame = out[f];
    frame.resize(kFrameLen);
    const int64_t start = f * kFrameHop;
    for (int64_t j = 0; j < kFrameLen; ++j) {
      const double s = chunk.samples[reflect_index(start + j, n)];
      frame[j] = windowed ? s * hamming[j] : s;
    }
  }
  return out;
}

FeatureMatrix lps(const AudioChunk& chunk) {
  auto frames = frame_signal(chunk);
  FeatureMatrix m = make_matrix(FeatureKind::kLps, frames.size());
  for (size_t f = 0; f < frames.size(); ++f) {
    auto power = power_spectrum(frames[f], kFftSize);
    for (int k = 0; k < kLpsDim; ++k) {
      m.at(f, k) = std::log(std::max(power[k], kLogFloor));
    }
  }
  return m;
}

std::vector<std::vector<double>> mel_filterbank(int n_filters, int n_fft,
                                                double sample_rate,
                                                double f_lo, double f_hi) {
  check_arg(n_filters >= 1 && f_hi > f_lo && f_lo >= 0.0,
            "mel_filterbank: invalid configuration");
  const int bins = n_fft / 2 + 1;
  std::vector<double> edges(n_filters + 2);
  const double m_lo = hz_to_mel(f_lo), m_hi = hz_to_mel(f_hi);
  for (int j = 0; j < n_filters + 2; ++j) {
    edges[j] = mel_to_hz(m_lo + (m_hi - m_lo) * j / (n_filters + 1));
  }
  std::vector<std::vector<double>> filters(n_filters,
                                           std::vector<double>(bins, 0.0));
  for (int j = 0; j < n_filters; ++j) {
    const double left = edges[j], peak = edges[j + 1], right = edges[j + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * sample_rate / n_fft;
      if (f > left && f < peak) {
        filters[j][k] = (f - left) / (peak - left);
      } else if (f >= peak && f < right) {
        filters[j][k] = (right - f) / (right - peak);
      }
    }
  }
  return filters;
}

FeatureMatrix mfcc(const AudioChunk& chunk) {
  auto frames = frame_signal(chunk);
  static const auto filters = mel_filterbank(kNumMelFilters, kFftSize,
                                             kSampleRate, 0.0, 8000.0);
  // Orthonormal DCT-II basis, first kMfccDim rows.
  static const std::vector<double> dct = [] {
    std::vector<double> t(kMfccDim * kNumMelFilters);
    for (int k = 0; k < kMfccDim; ++k) {
      const double a = k == 0 ? std::sqrt(1.0 / kNumMelFilters)
                              : std::sqrt(2.0 / kNumMelFilters);
      for (int j = 0; j < kNumMelFilters; ++j) {
        t[k * kNumMelFilters + j] =
            a * std::cos(M_PI * k * (2 * j + 1) / (2.0 * kNumMelFilters));
      }
    }
    return t;
  }();

  FeatureMatrix m = make_matrix(FeatureKind::kMfcc, frames.size());
  std::vector<double> logmel(kNumMelFilters);
  for (size_t f = 0; f < frames.size(); ++f) {
    auto power = power_spectrum(frames[f], kFftSize);
    for (int j = 0; j < kNumMelFilters; ++j) {
      double e = 0;
      for (int k = 0; k < kLpsDim; ++k) e += filters[j][k] * power[k];
      logmel[j] = std::log(std::max(e, kLogFloor));
    }
    for (int k = 0; k < kMfccDim; ++k) {
      double c = 0;
      for (int j = 0; j < kNumMelFilters; ++j) {
        c += dct[k * kNumMelFilters + j] * logmel[j];
      }
      m.at(f, k) = c;
    }
  }
  return m;
}

FeatureMatrix prosody(const AudioChunk& chunk) {
  auto frames = frame_signal(chunk, /*windowed=*/false);
  const int64_t n_frames = static_cast<int64_t>(frames.size());
  FeatureMatrix m = make_matrix(FeatureKind::kProsody, n_frames);

  std::vector<double> f0(n_frames, 0.0);
  std::vector<bool> voiced(n_frames, false);

  for (int64_t f = 0; f < n_frames; ++f) {
    // Zero-crossing rate and RMS on the plain frame.
    const auto& frame = frames[f];
    int64_t crossings = 0;
    double energy = 0;
    for (int64_t j = 0; j < kFrameLen; ++j) {
      energy += frame[j] * frame[j];
      if (j > 0 && ((frame[j - 1] >= 0.0) != (frame[j] >= 0.0))) ++crossings;
    }
    m.at(f, 2) = static_cast<double>(crossings) / (kFrameLen - 1);
    m.at(f, 3) = std::sqrt(energy / kFrameLen);

    // F0 by normalized autocorrelation over a wider centered window, so the
    // full 40..500 Hz lag range keeps enough overlap.
    auto win = centered_frame(chunk, f, kF0Window);
    double mean = 0;
    for (double v : win) mean += v;
    mean /= kF0Window;
    for (double& v : win) v -= mean;

    std::vector<double> nr(kF0LagMax + 1, 0.0);
    for (int lag = kF0LagMin; lag <= kF0LagMax; ++lag) {
      double r = 0, e0 = 0, e1 = 0;
      const int64_t span = kF0Window - lag;
      for (int64_t j = 0; j < span; ++j) {
        r += win[j] * win[j + lag];
        e0 += win[j] * win[j];
        e1 += win[j + lag] * win[j + lag];
      }
      nr[lag] = r / std::sqrt(e0 * e1 + 1e-20);
    }
    double peak = 0;
    for (int lag = kF0LagMin; lag <= kF0LagMax; ++lag) {
      peak = std::max(peak, nr[lag]);
    }
    m.at(f, 1) = std::clamp(peak, 0.0, 1.0);

    if (peak >= kVoicingThreshold) {
      // Earliest local maximum close to the global peak wins, which keeps
      // the fundamental instead of a period multiple.
      int best = 0;
      for (int lag = kF0LagMin; lag <= kF0LagMax; ++lag) {
        const bool local_max =
            (lag == kF0LagMin || nr[lag] >= nr[lag - 1]) &&
            (lag == kF0LagMax || nr[lag] >= nr[lag + 1]);
        if (local_max && nr[lag] >= 0.9 * peak) {
          best = lag;
          break;
        }
      }
      double lag_hat = best;
      if (best > kF0LagMin && best < kF0LagMax) {
        const double denom = nr[best - 1] - 2.0 * nr[best] + nr[best + 1];
        if (std::abs(denom) > 1e-12) {
          lag_hat += 0.5 * (nr[best - 1] - nr[best + 1]) / denom;
        }
      }
      const double hz =
          std::clamp(kSampleRate / lag_hat, 40.0, 500.0);
      f0[f] = hz;
      voiced[f] = true;
    }
  }

  // Interpolated log F0: linear across unvoiced gaps, held at the edges,
  // log floor when the whole chunk is unvoiced.
  int64_t prev = -1;
  const double log_floor = std::log(kLogFloor);
  std::vector<double> logf0(n_frames, log_floor);
  for (int64_t f = 0; f < n_frames; ++f) {
    if (!voiced[f]) continue;
    const double lf = std::log(f0[f]);
    logf0[f] = lf;
    if (prev < 0) {
      for (int64_t j = 0; j < f; ++j) logf0[j] = lf;
    } else {
      const double lp = logf0[prev];
      for (int64_t j = prev + 1; j < f; ++j) {
        const double w = static_cast<double>(j - prev) / (f - prev);
        logf0[j] = lp + w * (lf - lp);
      }
    }
    prev = f;
  }
  if (prev >= 0) {
    for (int64_t j = prev + 1; j < n_frames; ++j) logf0[j] = logf0[prev];
  }
  for (int64_t f = 0; f < n_frames; ++f) {
    m.at(f, 0) = logf0[f];
  }
  return m;
}

StatsAccumulator::StatsAccumulator(FeatureKind kind)
    : kind_(kind),
      mean_(feature_dim(kind), 0.0),
      m2_(feature_dim(kind), 0.0) {}

void StatsAccumulator::add(const FeatureMatrix& features) {
  check_arg(features.kind == kind_, "stats: feature kind mismatch");
  check_arg(features.cols == static_cast<int64_t>(mean_.size()),
            "stats: dimension mismatch");
  for (int64_t r = 0; r < features.rows; ++r) {
    ++count_;
    for (int64_t c = 0; c < features.cols; ++c) {
      const double x = features.at(r, c);
      const double d = x - mean_[c];
      mean_[c] += d / count_;
      m2_[c] += d * (x - mean_[c]);
    }
  }
}

StandardizationStats StatsAccumulator::finalize() const {
  check_arg(count_ > 0, "stats: empty dataset");
  StandardizationStats s;
  s.kind = kind_;
  s.mean = mean_;
  s.var.resize(m2_.size());
  for (size_t c = 0; c < m2_.size(); ++c) {
    s.var[c] = std::max(m2_[c] / count_, 1e-8);
  }
  return s;
}

void standardize(FeatureMatrix* features, const StandardizationStats& stats) {
  check_arg(features->kind == stats.kind, "standardize: feature kind mismatch");
  check_arg(features->cols == static_cast<int64_t>(stats.mean.size()),
            "standardize: dimension mismatch");
  for (int64_t r = 0; r < features->rows; ++r) {
    for (int64_t c = 0; c < features->cols; ++c) {
      features->at(r, c) =
          (features->at(r, c) - stats.mean[c]) / std::sqrt(stats.var[c]);
    }
  }
}

void destandardize(FeatureMatrix* features, const StandardizationStats& stats) {
  check_arg(features->kind == stats.kind,
            "destandardize: feature kind mismatch");
  for (int64_t r = 0; r < features->rows; ++r) {
    for (int64_t c = 0; c < features->cols; ++c) {
      features->at(r, c) =
          features->at(r, c) * std::sqrt(stats.var[c]) + stats.mean[c];
    }
  }
}

}  // namespace pase
