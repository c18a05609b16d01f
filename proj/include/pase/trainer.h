// pase/trainer.h

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
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "pase/adam.h"
#include "pase/checkpoint.h"
#include "pase/dsp.h"
#include "pase/encoder.h"
#include "pase/workers.h"

namespace pase {

struct TrainConfig {
  double learning_rate = 5e-4;
  int64_t halving_period_epochs = 30;
  int64_t epochs = 150;
  int64_t batch_size_chunks = 32;
  int64_t chunk_samples = 16000;
  std::set<WorkerName> enabled_workers{kAllWorkers.begin(), kAllWorkers.end()};
  uint64_t seed = 0;
  // Deterministic sequential chunk offsets instead of per-epoch random ones
  // (used by small fixed-data runs).
  bool randomize_chunk_offsets = true;
  // Length of the separately encoded context that SPC triples sample from.
  int64_t spc_context_samples = 32000;

  void validate() const;
  std::string fingerprint_text() const;  // canonical text, used for hashing
};

// Stepped learning rate: initial rate halved every halving period.
double lr_at(int64_t epoch, const TrainConfig& config);

// In-memory utterance: id, mono 16 kHz samples, optional probe label/split.
struct Utterance {
  std::string id;
  std::vector<float> samples;
  int label = -1;
  std::string split;  // "train", "valid", "test" or empty
};

struct StepReport {
  // Workers that contributed a loss this step (a worker can sit out when the
  // batch offers it no valid sample).
  std::map<WorkerName, double> losses;
  double total = 0.0;
};

// Joint self-supervised optimization of encoder + enabled workers.
class Trainer {
 public:
  Trainer(const TrainConfig& config, const EncoderConfig& encoder_config,
          std::vector<Utterance> train_set, std::vector<Utterance> valid_set);
  Trainer(const TrainConfig& config, const EncoderConfig& encoder_config,
          const WorkerSetConfig<float>& worker_config,
          std::vector<Utterance> train_set, std::vector<Utterance> valid_set);

  // Computes target standardization statistics over the train set; must run
  // (or be restored from a checkpoint) before any step. Idempotent.
  void prepare();
  bool prepared() const { return prepared_; }

  // One optimization step over a batch of chunks. Throws on a non-finite
  // loss or gradient, leaving parameters and moments untouched.
  StepReport train_step(const std::vector<AudioChunk>& batch);

  // Loss evaluation without optimization (eval-phase normalization).
  StepReport eval_step(const std::vector<AudioChunk>& batch, Rng& sampler_rng);

  // Full run: epochs, per-epoch checkpoint + loss curves under out_dir.
  // stop_after_epochs > 0 bounds the epochs executed in this call (the run
  // stays resumable from the latest checkpoint). Returns the path of the
  // last checkpoint written.
  std::string run(const std::string& out_dir, std::ostream* log,
                  int64_t stop_after_epochs = -1);

  // Deterministic chunk plan for one epoch (same-utterance chunks adjacent).
  std::vector<AudioChunk> epoch_chunks(int64_t epoch) const;

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

  Encoder<float>& encoder() { return *encoder_; }
  WorkerSet<float>& workers() { return *workers_; }
  const TrainConfig& config() const { return config_; }
  const StandardizationStats& stats(FeatureKind kind) const;
  int64_t epoch() const { return epoch_; }
  int64_t global_step() const { return global_step_; }

 private:
  Variable<float> chunk_tensor(const std::vector<AudioChunk>& batch) const;
  StepReport compute_losses(const std::vector<AudioChunk>& batch,
                            bool train_phase, Rng& sampler_rng,
                            Variable<float>* total_out);

  TrainConfig config_;
  EncoderConfig encoder_config_;
  std::vector<Utterance> train_set_, valid_set_;
  std::unique_ptr<Encoder<float>> encoder_;
  std::unique_ptr<WorkerSet<float>> workers_;
  std::unique_ptr<AdamOptimizer<float>> optimizer_;
  std::map<FeatureKind, StandardizationStats> stats_;
  bool prepared_ = false;
  int64_t epoch_ = 0;
  int64_t global_step_ = 0;
  uint64_t config_hash_ = 0;
};

// Config for retraining with one worker discarded.
TrainConfig ablation_config(const TrainConfig& base, WorkerName dropped);

// Loss-curve line: epoch, lr, one column per enabled worker, then total.
std::string curve_header(const std::set<WorkerName>& enabled);
std::string curve_line(int64_t epoch, double lr,
                       const std::set<WorkerName>& enabled,
                       const std::map<WorkerName, double>& losses,
                       double total);

}  // namespace pase
