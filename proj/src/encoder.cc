// pase/encoder.cc

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

#include "pase/encoder.h"

#include <array>
#include <cmath>

#include "pase/rng.h"

namespace pase {

int64_t EncoderConfig::total_stride() const {
  int64_t s = 1;
  for (int64_t v : block_strides) s *= v;
  return s;
}

void EncoderConfig::validate() const {
  check_arg(sinc_width >= 3 && sinc_width % 2 == 1,
            "encoder: sinc width must be odd");
  check_arg(sinc_filters >= 1, "encoder: need at least one sinc filter");
  check_arg(block_widths.size() == block_filters.size() &&
                block_widths.size() == block_strides.size() &&
                !block_widths.empty(),
            "encoder: inconsistent block lists");
  check_arg(embedding_dim >= 1 && sample_rate > 0,
            "encoder: invalid dims");
  for (size_t i = 0; i < block_widths.size(); ++i) {
    check_arg(block_widths[i] >= block_strides[i] && block_strides[i] >= 1,
              "encoder: block " + std::to_string(i) + " needs W >= S >= 1");
  }
}

namespace {

// (width, stride, pad_left) per layer, front end first.
std::vector<std::array<int64_t, 3>> layer_geometry(const EncoderConfig& c) {
  std::vector<std::array<int64_t, 3>> layers;
  layers.push_back({c.sinc_width, 1, (c.sinc_width - 1) / 2});
  for (size_t i = 0; i < c.block_widths.size(); ++i) {
    const int64_t total = c.block_widths[i] - c.block_strides[i];
    layers.push_back({c.block_widths[i], c.block_strides[i], total / 2});
  }
  layers.push_back({1, 1, 0});  // projection
  return layers;
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace

int64_t receptive_field(const EncoderConfig& config) {
  config.validate();
  int64_t rf = 1, stride = 1;
  for (const auto& [w, s, p] : layer_geometry(config)) {
    (void)p;
    rf += (w - 1) * stride;
    stride *= s;
  }
  return rf;
}

std::pair<int64_t, int64_t> receptive_window(const EncoderConfig& config,
                                             int64_t frame) {
  auto layers = layer_geometry(config);
  int64_t lo = frame, hi = frame;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    const auto& [w, s, p] = *it;
    lo = lo * s - p;
    hi = hi * s - p + w - 1;
  }
  return {lo, hi};
}

template <typename Real>
Encoder<Real>::Encoder(const EncoderConfig& config, uint64_t seed)
    : config_(config) {
  config_.validate();
  min_band_norm_ =
      static_cast<Real>(config_.sinc_min_band_hz / config_.sample_rate);
  Rng rng(derive_seed(seed, 0x656e63));

  // Sinc cutoffs: band edges equally spaced on the mel scale.
  const int64_t filters = config_.sinc_filters;
  const double fs = static_cast<double>(config_.sample_rate);
  const double mel_lo = hz_to_mel(config_.sinc_min_freq_hz);
  const double mel_hi = hz_to_mel(fs / 2.0);
  std::vector<Real> f1(filters), band(filters);
  for (int64_t i = 0; i < filters; ++i) {
    const double lo_hz = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / filters);
    const double hi_hz =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * (i + 1) / filters);
    f1[i] = static_cast<Real>(lo_hz / fs);
    // Keep the top edge a hair under the Nyquist clamp so its gradient is
    // live from the start.
    band[i] = static_cast<Real>(
        std::max((hi_hz - lo_hz) / fs - static_cast<double>(min_band_norm_) -
                     1e-4,
                 1e-4));
  }
  sinc_f1_ = Variable<Real>::from_data({filters}, std::move(f1), true);
  sinc_band_ = Variable<Real>::from_data({filters}, std::move(band), true);

  sinc_post_.init(filters);
  int64_t in_ch = filters;
  for (size_t i = 0; i < config_.block_widths.size(); ++i) {
    const int64_t out_ch = config_.block_filters[i];
    const int64_t w = config_.block_widths[i];
    block_kernels_.push_back(
        uniform_init<Real>({out_ch, in_ch, w}, in_ch * w, rng));
    block_post_.emplace_back();
    block_post_.back().init(out_ch);
    in_ch = out_ch;
  }
  proj_kernel_ = uniform_init<Real>({config_.embedding_dim, in_ch, 1}, in_ch, rng);
  out_run_mean_.assign(config_.embedding_dim, Real(0));
  out_run_var_.assign(config_.embedding_dim, Real(1));
}

template <typename Real>
Variable<Real> Encoder<Real>::forward(const Variable<Real>& wav,
                                      bool train_phase, bool update_running) {
  check_arg(wav.rank() == 3 && wav.dim(1) == 1,
            "encoder: input must be [B, 1, T]");
  const int64_t t = wav.dim(2);
  check_arg(t > 0 && t % config_.total_stride() == 0,
            "encoder: input length " + std::to_string(t) +
                " is not a positive multiple of " +
                std::to_string(config_.total_stride()));

  auto kernels = sinc_kernels(sinc_f1_, sinc_band_, config_.sinc_width,
                              min_band_norm_);
  const int64_t half = (config_.sinc_width - 1) / 2;
  auto h = conv1d(wav, kernels, 1, half, half);
  h = sinc_post_.apply(h, train_phase, update_running);

  for (size_t i = 0; i < block_kernels_.size(); ++i) {
    const auto [pl, pr] = conv_same_padding(h.dim(2), config_.block_widths[i],
                                            config_.block_strides[i]);
    h = conv1d(h, block_kernels_[i], config_.block_strides[i], pl, pr);
    h = block_post_[i].apply(h, train_phase, update_running);
  }

  h = conv1d(h, proj_kernel_, 1, 0, 0);
  return batchnorm<Real>(h, nullptr, nullptr, &out_run_mean_, &out_run_var_,
                         train_phase, update_running, Real(0.1), Real(1e-5));
}

template <typename Real>
FeatureMatrix Encoder<Real>::encode(const AudioChunk& chunk) {
  check_arg(chunk.sample_rate == config_.sample_rate,
            "encode: unexpected sample rate");
  const int64_t t = static_cast<int64_t>(chunk.samples.size());
  check_arg(t > 0 && t % config_.total_stride() == 0,
            "encode: chunk length must be a positive multiple of " +
                std::to_string(config_.total_stride()));
  std::vector<Real> data(t);
  for (int64_t i = 0; i < t; ++i) data[i] = static_cast<Real>(chunk.samples[i]);
  auto x = Variable<Real>::from_data({1, 1, t}, std::move(data));
  auto y = forward(x, /*train_phase=*/false, /*update_running=*/false);

  FeatureMatrix m;
  m.kind = FeatureKind::kEmbedding;
  m.rows = y.dim(2);
  m.cols = y.dim(1);
  m.data.resize(m.rows * m.cols);
  for (int64_t c = 0; c < m.cols; ++c) {
    for (int64_t f = 0; f < m.rows; ++f) {
      m.data[f * m.cols + c] = static_cast<double>(y.value()[c * m.rows + f]);
    }
  }
  return m;
}

template <typename Real>
std::vector<std::pair<double, double>> Encoder<Real>::sinc_bands_hz() const {
  std::vector<std::pair<double, double>> bands;
  const double fs = static_cast<double>(config_.sample_rate);
  for (int64_t i = 0; i < config_.sinc_filters; ++i) {
    double lo = std::abs(static_cast<double>(sinc_f1_.value()[i]));
    lo = std::min(lo, 0.5 - static_cast<double>(min_band_norm_));
    double hi = lo + static_cast<double>(min_band_norm_) +
                std::abs(static_cast<double>(sinc_band_.value()[i]));
    hi = std::min(hi, 0.5);
    bands.emplace_back(lo * fs, hi * fs);
  }
  return bands;
}

template <typename Real>
std::vector<Variable<Real>> Encoder<Real>::parameters() {
  std::vector<Variable<Real>> out;
  visit_params([&out](const std::string&, Variable<Real>& v) {
    out.push_back(v);
  });
  return out;
}

template <typename Real>
void Encoder<Real>::visit_params(
    const std::function<void(const std::string&, Variable<Real>&)>& fn) {
  fn("enc.sinc.f1", sinc_f1_);
  fn("enc.sinc.band", sinc_band_);
  sinc_post_.visit_params("enc.sinc", fn);
  for (size_t i = 0; i < block_kernels_.size(); ++i) {
    const std::string p = "enc.block" + std::to_string(i);
    fn(p + ".kernel", block_kernels_[i]);
    block_post_[i].visit_params(p, fn);
  }
  fn("enc.proj.kernel", proj_kernel_);
}

template <typename Real>
void Encoder<Real>::visit_buffers(
    const std::function<void(const std::string&, std::vector<Real>&)>& fn) {
  sinc_post_.visit_buffers("enc.sinc", fn);
  for (size_t i = 0; i < block_post_.size(); ++i) {
    block_post_[i].visit_buffers("enc.block" + std::to_string(i), fn);
  }
  fn("enc.out_bn.rmean", out_run_mean_);
  fn("enc.out_bn.rvar", out_run_var_);
}

template class Encoder<float>;
template class Encoder<double>;

}  // namespace pase
