// pase/encoder.h

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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pase/dsp.h"
#include "pase/layers.h"
#include "pase/ops.h"
#include "pase/tensor.h"

namespace pase {

// Waveform-to-embedding encoder: a sinc-parameterized band-pass front end,
// a stack of strided conv blocks (conv -> BN -> PReLU), a 1x1 projection and
// a final non-affine BN. Total decimation is the product of the strides.
struct EncoderConfig {
  int64_t sinc_width = 251;
  int64_t sinc_filters = 64;
  std::vector<int64_t> block_widths{20, 11, 11, 11, 11, 11, 11};
  std::vector<int64_t> block_filters{64, 128, 128, 256, 256, 512, 512};
  std::vector<int64_t> block_strides{10, 2, 1, 2, 1, 2, 2};
  int64_t embedding_dim = 100;
  int64_t sample_rate = 16000;
  double sinc_min_band_hz = 50.0;
  double sinc_min_freq_hz = 30.0;

  int64_t total_stride() const;
  void validate() const;
};

// Analytic receptive field in input samples: 1 + sum (W_i - 1) * (cumulative
// stride before layer i).
int64_t receptive_field(const EncoderConfig& config);

// Inclusive input-sample interval that influences one output frame
// (unclipped; may extend past the signal ends into padding).
std::pair<int64_t, int64_t> receptive_window(const EncoderConfig& config,
                                             int64_t frame);

template <typename Real>
class Encoder {
 public:
  Encoder(const EncoderConfig& config, uint64_t seed);

  // wav: [B, 1, T] with T a positive multiple of total_stride().
  // Returns [B, embedding_dim, T / total_stride()].
  Variable<Real> forward(const Variable<Real>& wav, bool train_phase,
                         bool update_running);

  // Eval-phase encoding of one chunk into an EMBEDDING feature matrix.
  FeatureMatrix encode(const AudioChunk& chunk);

  const EncoderConfig& config() const { return config_; }

  // Learnable parameters of the sinc layer alone (cutoff + bandwidth).
  int64_t sinc_param_count() const { return 2 * config_.sinc_filters; }
  // Effective (lo, hi) band edges in Hz, for inspection.
  std::vector<std::pair<double, double>> sinc_bands_hz() const;

  std::vector<Variable<Real>> parameters();
  void visit_params(
      const std::function<void(const std::string&, Variable<Real>&)>& fn);
  void visit_buffers(
      const std::function<void(const std::string&, std::vector<Real>&)>& fn);

 private:
  EncoderConfig config_;
  Variable<Real> sinc_f1_, sinc_band_;
  BnPreluLayer<Real> sinc_post_;
  std::vector<Variable<Real>> block_kernels_;
  std::vector<BnPreluLayer<Real>> block_post_;
  Variable<Real> proj_kernel_;
  std::vector<Real> out_run_mean_, out_run_var_;
  Real min_band_norm_;
};

}  // namespace pase
