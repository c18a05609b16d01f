// pase/workers.h

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

#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pase/layers.h"
#include "pase/ops.h"
#include "pase/rng.h"
#include "pase/tensor.h"

namespace pase {

// The seven self-supervised heads sharing the encoder output: four
// regressors and three binary discriminators over sampled triples.
enum class WorkerName : uint8_t {
  kWave = 0,
  kLps,
  kMfcc,
  kProsody,
  kLim,
  kGim,
  kSpc,
};

inline constexpr std::array<WorkerName, 7> kAllWorkers{
    WorkerName::kWave, WorkerName::kLps, WorkerName::kMfcc,
    WorkerName::kProsody, WorkerName::kLim, WorkerName::kGim,
    WorkerName::kSpc};

std::string worker_name(WorkerName w);
// Rejects unknown names with a message listing the seven valid ones.
WorkerName parse_worker(const std::string& name);
bool worker_is_regression(WorkerName w);
int64_t worker_target_dim(WorkerName w);

struct WorkerSpec {
  WorkerName name = WorkerName::kWave;
  bool regression = true;
  int64_t target_dim = 1;
  bool enabled = true;
};
WorkerSpec worker_spec(WorkerName w, bool enabled = true);

// ---- sampling -------------------------------------------------------------

// What the trainer knows about one encoded batch slot.
struct SlotInfo {
  std::string utterance_id;
  int64_t chunk_offset = 0;
  int32_t n_frames = 0;
};

struct FrameRef {
  int32_t slot = 0;
  int32_t frame = 0;
};

// Anchor and positive are distinct frames of one slot; the negative comes
// from a slot of a different utterance. Requires >= 2 distinct utterances.
struct LimTriple {
  FrameRef anchor, positive, negative;
};
LimTriple sample_lim(const std::vector<SlotInfo>& slots, Rng& rng);

// Whole-slot means: anchor/positive are two distinct chunks of the same
// utterance, the negative a chunk of another one. One triple per utterance
// with a usable same-utterance pair in the batch.
struct GimTriple {
  int32_t anchor_slot = 0, positive_slot = 0, negative_slot = 0;
};
std::vector<GimTriple> gim_triples(const std::vector<SlotInfo>& slots, Rng& rng);

// Anchor frame plus two 5-frame spans inside one encoded context: the
// positive strictly in the future, the negative strictly in the past, both
// offset by 15..46 frames so that every sampled frame stays clear of the
// anchor's receptive field yet within 50 frames of it.
inline constexpr int32_t kSpcSpan = 5;
inline constexpr int32_t kSpcMinOffset = 15;
inline constexpr int32_t kSpcMaxOffset = 46;  // + span - 1 = 50 frames away
inline constexpr int32_t kSpcHeadroom = 50;

struct SpcTriple {
  int32_t anchor = 0;
  int32_t pos_start = 0;  // frames [pos_start, pos_start + kSpcSpan)
  int32_t neg_start = 0;
};
SpcTriple sample_spc(int32_t n_frames, Rng& rng);
// Smallest context (in frames) that admits an anchor.
int32_t spc_min_frames();

// ---- heads ----------------------------------------------------------------

template <typename Real>
class RegressionHead {
 public:
  RegressionHead(int64_t in_dim, int64_t hidden, int64_t out_dim, Rng& rng);
  // rows: [M, in_dim] -> [M, out_dim]
  Variable<Real> forward(const Variable<Real>& rows);
  void visit_params(
      const std::string& prefix,
      const std::function<void(const std::string&, Variable<Real>&)>& fn);

 private:
  Variable<Real> w1_, b1_, slopes_, w2_, b2_;
};

template <typename Real>
class WaveformDecoder {
 public:
  struct Config {
    std::vector<int64_t> strides{4, 4, 10};
    std::vector<int64_t> widths{8, 8, 20};
    std::vector<int64_t> channels{128, 64, 32};
    int64_t mlp_hidden = 256;
  };

  WaveformDecoder(int64_t emb_dim, const Config& config, Rng& rng);
  int64_t upsample_factor() const;
  // emb: [B, emb_dim, N] -> [B, 1, N * upsample_factor()]
  Variable<Real> forward(const Variable<Real>& emb, bool train_phase,
                         bool update_running);
  void visit_params(
      const std::string& prefix,
      const std::function<void(const std::string&, Variable<Real>&)>& fn);
  void visit_buffers(
      const std::string& prefix,
      const std::function<void(const std::string&, std::vector<Real>&)>& fn);

 private:
  Config config_;
  std::vector<Variable<Real>> kernels_;
  std::vector<BnPreluLayer<Real>> post_;
  Variable<Real> mlp_w1_, mlp_b1_, mlp_slopes_, mlp_w2_, mlp_b2_;
};

// Single-hidden-layer MLP on concatenated (anchor, candidate) rows, ending
// in one sigmoid unit.
template <typename Real>
class Discriminator {
 public:
  Discriminator(int64_t in_dim, int64_t hidden, Rng& rng);
  // pairs: [M, in_dim] -> probabilities [M, 1]
  Variable<Real> forward(const Variable<Real>& pairs);
  int64_t in_dim() const { return in_dim_; }
  void visit_params(
      const std::string& prefix,
      const std::function<void(const std::string&, Variable<Real>&)>& fn);

 private:
  int64_t in_dim_;
  Variable<Real> w1_, b1_, slopes_, w2_, b2_;
};

// ---- the full roster -------------------------------------------------------

template <typename Real>
struct WorkerSetConfig {
  int64_t emb_dim = 100;
  int64_t hidden = 256;
  int64_t lps_dim = 1025;
  int64_t mfcc_dim = 20;
  int64_t prosody_dim = 4;
  typename WaveformDecoder<Real>::Config decoder;
};

// All seven heads, built deterministically from one seed regardless of which
// workers end up enabled (so an ablated head keeps its initialization).
template <typename Real>
class WorkerSet {
 public:
  WorkerSet(const WorkerSetConfig<Real>& config, uint64_t seed);

  WaveformDecoder<Real>& wave_decoder() { return *wave_; }
  RegressionHead<Real>& regression_head(WorkerName w);
  Discriminator<Real>& discriminator(WorkerName w);
  int64_t target_dim(WorkerName w) const;

  std::vector<Variable<Real>> parameters(const std::set<WorkerName>& enabled);
  void visit_params(
      const std::function<void(const std::string&, Variable<Real>&)>& fn);
  void visit_buffers(
      const std::function<void(const std::string&, std::vector<Real>&)>& fn);

 private:
  WorkerSetConfig<Real> config_;
  std::unique_ptr<WaveformDecoder<Real>> wave_;
  std::unique_ptr<RegressionHead<Real>> lps_, mfcc_, prosody_;
  std::unique_ptr<Discriminator<Real>> lim_, gim_, spc_;
};

// Routes a worker's outputs to its loss: L1 for the waveform regressor, MSE
// for the feature regressors (targets must already be standardized), and the
// two-sided binary cross-entropy for discriminators, where `a` holds
// positive-pair probabilities and `b` negative-pair ones.
template <typename Real>
Variable<Real> worker_loss(WorkerName w, const Variable<Real>& a,
                           const Variable<Real>& b);

}  // namespace pase
