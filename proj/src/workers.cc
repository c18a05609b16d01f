// pase/workers.cc

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

#include "pase/workers.h"

#include <algorithm>
#include <map>

namespace pase {

std::string worker_name(WorkerName w) {
  switch (w) {
    case WorkerName::kWave:
      return "WAVE";
    case WorkerName::kLps:
      return "LPS";
    case WorkerName::kMfcc:
      return "MFCC";
    case WorkerName::kProsody:
      return "PROSODY";
    case WorkerName::kLim:
      return "LIM";
    case WorkerName::kGim:
      return "GIM";
    case WorkerName::kSpc:
      return "SPC";
  }
  return "?";
}

WorkerName parse_worker(const std::string& name) {
  for (WorkerName w : kAllWorkers) {
    if (worker_name(w) == name) return w;
  }
  std::string valid;
  for (WorkerName w : kAllWorkers) {
    if (!valid.empty()) valid += ", ";
    valid += worker_name(w);
  }
  throw std::invalid_argument("unknown worker '" + name + "'; valid: " + valid);
}

bool worker_is_regression(WorkerName w) {
  switch (w) {
    case WorkerName::kWave:
    case WorkerName::kLps:
    case WorkerName::kMfcc:
    case WorkerName::kProsody:
      return true;
    default:
      return false;
  }
}

int64_t worker_target_dim(WorkerName w) {
  switch (w) {
    case WorkerName::kWave:
      return 1;  // one output per time step
    case WorkerName::kLps:
      return 1025;
    case WorkerName::kMfcc:
      return 20;
    case WorkerName::kProsody:
      return 4;
    default:
      return 1;  // discriminator probability
  }
}

WorkerSpec worker_spec(WorkerName w, bool enabled) {
  return WorkerSpec{w, worker_is_regression(w), worker_target_dim(w), enabled};
}

// ---- sampling ---------------------------------------------------------------

LimTriple sample_lim(const std::vector<SlotInfo>& slots, Rng& rng) {
  check_arg(!slots.empty(), "sample_lim: empty batch");
  std::set<std::string> utts;
  for (const auto& s : slots) utts.insert(s.utterance_id);
  check_arg(utts.size() >= 2,
            "sample_lim: batch must contain at least two utterances");

  LimTriple t;
  // Anchor slot needs a second frame for the positive.
  do {
    t.anchor.slot = static_cast<int32_t>(
        rng.uniform_int(0, static_cast<int64_t>(slots.size()) - 1));
  } while (slots[t.anchor.slot].n_frames < 2);
  const int32_t n = slots[t.anchor.slot].n_frames;
  t.anchor.frame = static_cast<int32_t>(rng.uniform_int(0, n - 1));
  t.positive.slot = t.anchor.slot;
  do {
    t.positive.frame = static_cast<int32_t>(rng.uniform_int(0, n - 1));
  } while (t.positive.frame == t.anchor.frame);
  do {
    t.negative.slot = static_cast<int32_t>(
        rng.uniform_int(0, static_cast<int64_t>(slots.size()) - 1));
  } while (slots[t.negative.slot].utterance_id ==
           slots[t.anchor.slot].utterance_id);
  t.negative.frame = static_cast<int32_t>(
      rng.uniform_int(0, slots[t.negative.slot].n_frames - 1));
  return t;
}

std::vector<GimTriple> gim_triples(const std::vector<SlotInfo>& slots,
                                   Rng& rng) {
  // Group batch slots by utterance, preserving first appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<int32_t>> groups;
  for (size_t i = 0; i < slots.size(); ++i) {
    auto& g = groups[slots[i].utterance_id];
    if (g.empty()) order.push_back(slots[i].utterance_id);
    g.push_back(static_cast<int32_t>(i));
  }
  std::vector<GimTriple> out;
  if (order.size() < 2) return out;  // no cross-utterance negative available
  for (const auto& utt : order) {
    const auto& g = groups[utt];
    if (g.size() < 2) continue;
    // Uniform draw over the ordered pairs with distinct chunk offsets.
    std::vector<std::pair<int32_t, int32_t>> pairs;
    for (int32_t a : g) {
      for (int32_t b : g) {
        if (a != b && slots[a].chunk_offset != slots[b].chunk_offset) {
          pairs.emplace_back(a, b);
        }
      }
    }
    if (pairs.empty()) continue;
    GimTriple t;
    const auto& pick =
        pairs[rng.uniform_int(0, static_cast<int64_t>(pairs.size()) - 1)];
    t.anchor_slot = pick.first;
    t.positive_slot = pick.second;
    do {
      t.negative_slot = static_cast<int32_t>(
          rng.uniform_int(0, static_cast<int64_t>(slots.size()) - 1));
    } while (slots[t.negative_slot].utterance_id == utt);
    out.push_back(t);
  }
  return out;
}

int32_t spc_min_frames() { return 2 * kSpcHeadroom + 1; }

SpcTriple sample_spc(int32_t n_frames, Rng& rng) {
  check_arg(n_frames >= spc_min_frames(),
            "sample_spc: context of " + std::to_string(n_frames) +
                " frames admits no anchor (need >= " +
                std::to_string(spc_min_frames()) + ")");
  SpcTriple t;
  t.anchor = static_cast<int32_t>(
      rng.uniform_int(kSpcHeadroom, n_frames - 1 - kSpcHeadroom));
  const int32_t dp =
      static_cast<int32_t>(rng.uniform_int(kSpcMinOffset, kSpcMaxOffset));
  const int32_t dn =
      static_cast<int32_t>(rng.uniform_int(kSpcMinOffset, kSpcMaxOffset));
  t.pos_start = t.anchor + dp;
  t.neg_start = t.anchor - dn - (kSpcSpan - 1);
  return t;
}

// ---- heads -------------------------------------------------------------------

template <typename Real>
RegressionHead<Real>::RegressionHead(int64_t in_dim, int64_t hidden,
                                     int64_t out_dim, Rng& rng) {
  w1_ = uniform_init<Real>({hidden, in_dim}, in_dim, rng);
  b1_ = Variable<Real>::zeros({hidden}, true);
  slopes_ = Variable<Real>::full({hidden}, Real(0.25), true);
  w2_ = uniform_init<Real>({out_dim, hidden}, hidden, rng);
  b2_ = Variable<Real>::zeros({out_dim}, true);
}

template <typename Real>
Variable<Real> RegressionHead<Real>::forward(const Variable<Real>& rows) {
  auto h = prelu(linear(rows, w1_, &b1_), slopes_);
  return linear(h, w2_, &b2_);
}

template <typename Real>
void RegressionHead<Real>::visit_params(
    const std::string& prefix,
    const std::function<void(const std::string&, Variable<Real>&)>& fn) {
  fn(prefix + ".w1", w1_);
  fn(prefix + ".b1", b1_);
  fn(prefix + ".prelu", slopes_);
  fn(prefix + ".w2", w2_);
  fn(prefix + ".b2", b2_);
}

template <typename Real>
WaveformDecoder<Real>::WaveformDecoder(int64_t emb_dim, const Config& config,
                                       Rng& rng)
    : config_(config) {
  check_arg(config_.strides.size() == config_.widths.size() &&
                config_.strides.size() == config_.channels.size() &&
                !config_.strides.empty(),
            "decoder: inconsistent stage lists");
  int64_t in_ch = emb_dim;
  for (size_t i = 0; i < config_.strides.size(); ++i) {
    check_arg(config_.widths[i] >= config_.strides[i],
              "decoder: stage needs W >= S");
    const int64_t out_ch = config_.channels[i];
    kernels_.push_back(uniform_init<Real>({in_ch, out_ch, config_.widths[i]},
                                          in_ch * config_.widths[i], rng));
    post_.emplace_back();
    post_.back().init(out_ch);
    in_ch = out_ch;
  }
  mlp_w1_ = uniform_init<Real>({config_.mlp_hidden, in_ch}, in_ch, rng);
  mlp_b1_ = Variable<Real>::zeros({config_.mlp_hidden}, true);
  mlp_slopes_ = Variable<Real>::full({config_.mlp_hidden}, Real(0.25), true);
  mlp_w2_ = uniform_init<Real>({1, config_.mlp_hidden}, config_.mlp_hidden, rng);
  mlp_b2_ = Variable<Real>::zeros({1}, true);
}

template <typename Real>
int64_t WaveformDecoder<Real>::upsample_factor() const {
  int64_t f = 1;
  for (int64_t s : config_.strides) f *= s;
  return f;
}

template <typename Real>
Variable<Real> WaveformDecoder<Real>::forward(const Variable<Real>& emb,
                                              bool train_phase,
                                              bool update_running) {
  check_arg(emb.rank() == 3, "decoder: input must be [B, C, N]");
  auto h = emb;
  for (size_t i = 0; i < kernels_.size(); ++i) {
    h = tconv1d(h, kernels_[i], config_.strides[i]);
    h = post_[i].apply(h, train_phase, update_running);
  }
  return mlp1d(h, mlp_w1_, mlp_b1_, mlp_slopes_, mlp_w2_, mlp_b2_);
}

template <typename Real>
void WaveformDecoder<Real>::visit_params(
    const std::string& prefix,
    const std::function<void(const std::string&, Variable<Real>&)>& fn) {
  for (size_t i = 0; i < kernels_.size(); ++i) {
    const std::string p = prefix + ".deconv" + std::to_string(i);
    fn(p + ".kernel", kernels_[i]);
    post_[i].visit_params(p, fn);
  }
  fn(prefix + ".mlp.w1", mlp_w1_);
  fn(prefix + ".mlp.b1", mlp_b1_);
  fn(prefix + ".mlp.prelu", mlp_slopes_);
  fn(prefix + ".mlp.w2", mlp_w2_);
  fn(prefix + ".mlp.b2", mlp_b2_);
}

template <typename Real>
void WaveformDecoder<Real>::visit_buffers(
    const std::string& prefix,
    const std::function<void(const std::string&, std::vector<Real>&)>& fn) {
  for (size_t i = 0; i < post_.size(); ++i) {
    post_[i].visit_buffers(prefix + ".deconv" + std::to_string(i), fn);
  }
}

template <typename Real>
Discriminator<Real>::Discriminator(int64_t in_dim, int64_t hidden, Rng& rng)
    : in_dim_(in_dim) {
  w1_ = uniform_init<Real>({hidden, in_dim}, in_dim, rng);
  b1_ = Variable<Real>::zeros({hidden}, true);
  slopes_ = Variable<Real>::full({hidden}, Real(0.25), true);
  w2_ = uniform_init<Real>({1, hidden}, hidden, rng);
  b2_ = Variable<Real>::zeros({1}, true);
}

template <typename Real>
Variable<Real> Discriminator<Real>::forward(const Variable<Real>& pairs) {
  check_arg(pairs.rank() == 2 && pairs.dim(1) == in_dim_,
            "discriminator: pairs must be [M, " + std::to_string(in_dim_) + "]");
  auto h = prelu(linear(pairs, w1_, &b1_), slopes_);
  return sigmoid(linear(h, w2_, &b2_));
}

template <typename Real>
void Discriminator<Real>::visit_params(
    const std::string& prefix,
    const std::function<void(const std::string&, Variable<Real>&)>& fn) {
  fn(prefix + ".w1", w1_);
  fn(prefix + ".b1", b1_);
  fn(prefix + ".prelu", slopes_);
  fn(prefix + ".w2", w2_);
  fn(prefix + ".b2", b2_);
}

// ---- roster -------------------------------------------------------------------

template <typename Real>
WorkerSet<Real>::WorkerSet(const WorkerSetConfig<Real>& config, uint64_t seed)
    : config_(config) {
  // One fixed construction order: ablation must not shift initialization.
  Rng rng(derive_seed(seed, 0x776b72));
  wave_ = std::make_unique<WaveformDecoder<Real>>(config_.emb_dim,
                                                  config_.decoder, rng);
  lps_ = std::make_unique<RegressionHead<Real>>(config_.emb_dim, config_.hidden,
                                                config_.lps_dim, rng);
  mfcc_ = std::make_unique<RegressionHead<Real>>(
      config_.emb_dim, config_.hidden, config_.mfcc_dim, rng);
  prosody_ = std::make_unique<RegressionHead<Real>>(
      config_.emb_dim, config_.hidden, config_.prosody_dim, rng);
  lim_ = std::make_unique<Discriminator<Real>>(2 * config_.emb_dim,
                                               config_.hidden, rng);
  gim_ = std::make_unique<Discriminator<Real>>(2 * config_.emb_dim,
                                               config_.hidden, rng);
  spc_ = std::make_unique<Discriminator<Real>>(
      (1 + kSpcSpan) * config_.emb_dim, config_.hidden, rng);
}

template <typename Real>
RegressionHead<Real>& WorkerSet<Real>::regression_head(WorkerName w) {
  switch (w) {
    case WorkerName::kLps:
      return *lps_;
    case WorkerName::kMfcc:
      return *mfcc_;
    case WorkerName::kProsody:
      return *prosody_;
    default:
      throw std::invalid_argument("regression_head: " + worker_name(w) +
                                  " has no frame regression head");
  }
}

template <typename Real>
Discriminator<Real>& WorkerSet<Real>::discriminator(WorkerName w) {
  switch (w) {
    case WorkerName::kLim:
      return *lim_;
    case WorkerName::kGim:
      return *gim_;
    case WorkerName::kSpc:
      return *spc_;
    default:
      throw std::invalid_argument("discriminator: " + worker_name(w) +
                                  " is not a discrimination worker");
  }
}

template <typename Real>
int64_t WorkerSet<Real>::target_dim(WorkerName w) const {
  switch (w) {
    case WorkerName::kLps:
      return config_.lps_dim;
    case WorkerName::kMfcc:
      return config_.mfcc_dim;
    case WorkerName::kProsody:
      return config_.prosody_dim;
    default:
      return worker_target_dim(w);
  }
}

template <typename Real>
std::vector<Variable<Real>> WorkerSet<Real>::parameters(
    const std::set<WorkerName>& enabled) {
  std::vector<Variable<Real>> out;
  auto push = [&out](const std::string&, Variable<Real>& v) {
    out.push_back(v);
  };
  if (enabled.count(WorkerName::kWave)) wave_->visit_params("w.WAVE", push);
  if (enabled.count(WorkerName::kLps)) lps_->visit_params("w.LPS", push);
  if (enabled.count(WorkerName::kMfcc)) mfcc_->visit_params("w.MFCC", push);
  if (enabled.count(WorkerName::kProsody))
    prosody_->visit_params("w.PROSODY", push);
  if (enabled.count(WorkerName::kLim)) lim_->visit_params("w.LIM", push);
  if (enabled.count(WorkerName::kGim)) gim_->visit_params("w.GIM", push);
  if (enabled.count(WorkerName::kSpc)) spc_->visit_params("w.SPC", push);
  return out;
}

template <typename Real>
void WorkerSet<Real>::visit_params(
    const std::function<void(const std::string&, Variable<Real>&)>& fn) {
  wave_->visit_params("w.WAVE", fn);
  lps_->visit_params("w.LPS", fn);
  mfcc_->visit_params("w.MFCC", fn);
  prosody_->visit_params("w.PROSODY", fn);
  lim_->visit_params("w.LIM", fn);
  gim_->visit_params("w.GIM", fn);
  spc_->visit_params("w.SPC", fn);
}

template <typename Real>
void WorkerSet<Real>::visit_buffers(
    const std::function<void(const std::string&, std::vector<Real>&)>& fn) {
  wave_->visit_buffers("w.WAVE", fn);
}

template <typename Real>
Variable<Real> worker_loss(WorkerName w, const Variable<Real>& a,
                           const Variable<Real>& b) {
  switch (w) {
    case WorkerName::kWave:
      return loss_l1(a, b);
    case WorkerName::kLps:
    case WorkerName::kMfcc:
    case WorkerName::kProsody:
      return loss_mse(a, b);
    case WorkerName::kLim:
    case WorkerName::kGim:
    case WorkerName::kSpc:
      return loss_bce(a, b);
  }
  throw std::invalid_argument("worker_loss: unknown worker");
}

#define PASE_INSTANTIATE_WORKERS(Real)                                  \
  template class RegressionHead<Real>;                                  \
  template class WaveformDecoder<Real>;                                 \
  template class Discriminator<Real>;                                   \
  template class WorkerSet<Real>;                                       \
  template Variable<Real> worker_loss(WorkerName, const Variable<Real>&, \
                                      const Variable<Real>&);

PASE_INSTANTIATE_WORKERS(float)
PASE_INSTANTIATE_WORKERS(double)

}  // namespace pase
