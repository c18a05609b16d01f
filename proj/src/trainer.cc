// pase/trainer.cc

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

#include "pase/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pase/rng.h"

namespace pase {

namespace {

// Stream identifiers for derived seeds.
constexpr uint64_t kStreamChunks = 0xc41;
constexpr uint64_t kStreamSampler = 0x5a1;
constexpr uint64_t kStreamValid = 0xea1;

// Length of an utterance trimmed to whole frames.
int64_t trimmed_len(int64_t n, int64_t multiple) {
  return (n / multiple) * multiple;
}

AudioChunk cut_chunk(const Utterance& u, int64_t offset, int64_t len) {
  AudioChunk c;
  c.utterance_id = u.id;
  c.offset = offset;
  c.samples.assign(len, 0.0f);
  const int64_t n = static_cast<int64_t>(u.samples.size());
  for (int64_t i = 0; i < len && offset + i < n; ++i) {
    c.samples[i] = u.samples[offset + i];
  }
  return c;
}

}  // namespace

void TrainConfig::validate() const {
  check_arg(learning_rate > 0 && halving_period_epochs > 0 && epochs > 0 &&
                batch_size_chunks > 0 && chunk_samples > 0,
            "train config: all numeric fields must be positive");
  check_arg(!enabled_workers.empty(),
            "train config: at least one worker must be enabled");
  check_arg(chunk_samples % kFrameHop == 0,
            "train config: chunk_samples must be a multiple of the frame hop");
  check_arg(spc_context_samples >= chunk_samples,
            "train config: SPC context must be at least one chunk");
}

std::string TrainConfig::fingerprint_text() const {
  std::ostringstream os;
  os << "lr=" << learning_rate << ";half=" << halving_period_epochs
     << ";epochs=" << epochs << ";batch=" << batch_size_chunks
     << ";chunk=" << chunk_samples << ";seed=" << seed
     << ";rand=" << randomize_chunk_offsets << ";spc=" << spc_context_samples
     << ";workers=";
  for (WorkerName w : enabled_workers) os << worker_name(w) << ",";
  return os.str();
}

double lr_at(int64_t epoch, const TrainConfig& config) {
  check_arg(epoch >= 0, "lr_at: negative epoch");
  const int64_t halvings = epoch / config.halving_period_epochs;
  return config.learning_rate * std::pow(0.5, static_cast<double>(halvings));
}

TrainConfig ablation_config(const TrainConfig& base, WorkerName dropped) {
  TrainConfig c = base;
  c.enabled_workers.erase(dropped);
  check_arg(!c.enabled_workers.empty(),
            "ablation: dropping " + worker_name(dropped) +
                " would leave no workers");
  return c;
}

std::string curve_header(const std::set<WorkerName>& enabled) {
  std::string line = "#epoch\tlr";
  for (WorkerName w : enabled) line += "\t" + worker_name(w);
  return line + "\ttotal";
}

std::string curve_line(int64_t epoch, double lr,
                       const std::set<WorkerName>& enabled,
                       const std::map<WorkerName, double>& losses,
                       double total) {
  std::ostringstream os;
  os << epoch << "\t" << lr;
  for (WorkerName w : enabled) {
    os << "\t";
    auto it = losses.find(w);
    if (it != losses.end()) {
      os << it->second;
    } else {
      os << "nan";
    }
  }
  os << "\t" << total;
  return os.str();
}

namespace {

WorkerSetConfig<float> default_worker_config(const EncoderConfig& enc) {
  WorkerSetConfig<float> wcfg;
  wcfg.emb_dim = enc.embedding_dim;
  return wcfg;
}

}  // namespace

Trainer::Trainer(const TrainConfig& config, const EncoderConfig& encoder_config,
                 std::vector<Utterance> train_set,
                 std::vector<Utterance> valid_set)
    : Trainer(config, encoder_config, default_worker_config(encoder_config),
              std::move(train_set), std::move(valid_set)) {}

Trainer::Trainer(const TrainConfig& config, const EncoderConfig& encoder_config,
                 const WorkerSetConfig<float>& worker_config,
                 std::vector<Utterance> train_set,
                 std::vector<Utterance> valid_set)
    : config_(config),
      encoder_config_(encoder_config),
      train_set_(std::move(train_set)),
      valid_set_(std::move(valid_set)) {
  config_.validate();
  encoder_config_.validate();
  check_arg(!train_set_.empty(), "trainer: empty training set");
  check_arg(config_.chunk_samples % encoder_config_.total_stride() == 0,
            "trainer: chunk length must be a multiple of the encoder stride");
  check_arg(worker_config.emb_dim == encoder_config_.embedding_dim,
            "trainer: worker embedding dim does not match the encoder");
  for (WorkerName w :
       {WorkerName::kLps, WorkerName::kMfcc, WorkerName::kProsody}) {
    if (config_.enabled_workers.count(w)) {
      check_arg(encoder_config_.total_stride() == kFrameHop,
                "trainer: frame regressors need an encoder stride equal to "
                "the feature hop");
    }
  }

  encoder_ = std::make_unique<Encoder<float>>(encoder_config_,
                                              derive_seed(config_.seed, 1));
  workers_ = std::make_unique<WorkerSet<float>>(worker_config,
                                                derive_seed(config_.seed, 2));
  if (config_.enabled_workers.count(WorkerName::kWave)) {
    check_arg(workers_->wave_decoder().upsample_factor() ==
                  encoder_config_.total_stride(),
              "trainer: decoder upsampling must invert the encoder stride");
  }

  auto params = encoder_->parameters();
  auto wparams = workers_->parameters(config_.enabled_workers);
  params.insert(params.end(), wparams.begin(), wparams.end());
  AdamConfig<float> acfg;
  acfg.learning_rate = static_cast<float>(config_.learning_rate);
  optimizer_ = std::make_unique<AdamOptimizer<float>>(std::move(params), acfg);

  config_hash_ = fnv1a_hash(config_.fingerprint_text());
}

void Trainer::prepare() {
  if (prepared_) return;
  for (WorkerName w : config_.enabled_workers) {
    FeatureKind kind;
    if (w == WorkerName::kLps) {
      kind = FeatureKind::kLps;
    } else if (w == WorkerName::kMfcc) {
      kind = FeatureKind::kMfcc;
    } else if (w == WorkerName::kProsody) {
      kind = FeatureKind::kProsody;
    } else {
      continue;
    }
    StatsAccumulator acc(kind);
    for (const auto& u : train_set_) {
      const int64_t len =
          trimmed_len(static_cast<int64_t>(u.samples.size()), kFrameHop);
      if (len < kFrameLen) continue;
      AudioChunk whole = cut_chunk(u, 0, len);
      switch (kind) {
        case FeatureKind::kLps:
          acc.add(lps(whole));
          break;
        case FeatureKind::kMfcc:
          acc.add(mfcc(whole));
          break;
        default:
          acc.add(prosody(whole));
          break;
      }
    }
    stats_[kind] = acc.finalize();
  }
  prepared_ = true;
}

const StandardizationStats& Trainer::stats(FeatureKind kind) const {
  auto it = stats_.find(kind);
  check_arg(it != stats_.end(), "trainer: no statistics for " +
                                    feature_kind_name(kind) +
                                    " (prepare() not run?)");
  return it->second;
}

std::vector<AudioChunk> Trainer::epoch_chunks(int64_t epoch) const {
  Rng rng(derive_seed(config_.seed, kStreamChunks, epoch));
  std::vector<int64_t> order(train_set_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Fisher-Yates; same-utterance chunks stay adjacent for GIM pairing.
  for (int64_t i = static_cast<int64_t>(order.size()) - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_int(0, i)]);
  }

  std::vector<AudioChunk> chunks;
  for (int64_t ui : order) {
    const Utterance& u = train_set_[ui];
    const int64_t n = static_cast<int64_t>(u.samples.size());
    const int64_t per_utt = std::max<int64_t>(1, n / config_.chunk_samples);
    std::vector<int64_t> offsets;
    const int64_t max_off = std::max<int64_t>(0, n - config_.chunk_samples);
    for (int64_t k = 0; k < per_utt; ++k) {
      int64_t off;
      if (config_.randomize_chunk_offsets && max_off > 0) {
        int guard = 0;
        do {
          off = rng.uniform_int(0, max_off);
        } while (std::find(offsets.begin(), offsets.end(), off) !=
                     offsets.end() &&
                 ++guard < 64);
      } else {
        off = std::min(k * config_.chunk_samples, max_off);
      }
      offsets.push_back(off);
    }
    for (int64_t off : offsets) {
      chunks.push_back(cut_chunk(u, off, config_.chunk_samples));
    }
  }
  return chunks;
}

Variable<float> Trainer::chunk_tensor(
    const std::vector<AudioChunk>& batch) const {
  const int64_t b = static_cast<int64_t>(batch.size());
  const int64_t t = config_.chunk_samples;
  std::vector<float> data(b * t);
  for (int64_t i = 0; i < b; ++i) {
    check_arg(static_cast<int64_t>(batch[i].samples.size()) == t,
              "trainer: batch chunk has wrong length");
    std::copy(batch[i].samples.begin(), batch[i].samples.end(),
              data.begin() + i * t);
  }
  return Variable<float>::from_data({b, 1, t}, std::move(data));
}

StepReport Trainer::compute_losses(const std::vector<AudioChunk>& batch,
                                   bool train_phase, Rng& sampler_rng,
                                   Variable<float>* total_out) {
  check_arg(!batch.empty(), "trainer: empty batch");
  const auto& enabled = config_.enabled_workers;
  for (WorkerName w : enabled) {
    if (w == WorkerName::kLps) stats(FeatureKind::kLps);
    if (w == WorkerName::kMfcc) stats(FeatureKind::kMfcc);
    if (w == WorkerName::kProsody) stats(FeatureKind::kProsody);
  }

  const int64_t b = static_cast<int64_t>(batch.size());
  const int64_t frames = config_.chunk_samples / encoder_config_.total_stride();
  auto wav = chunk_tensor(batch);
  auto emb = encoder_->forward(wav, train_phase, /*update_running=*/train_phase);

  std::vector<SlotInfo> slots;
  slots.reserve(b);
  for (const auto& c : batch) {
    slots.push_back({c.utterance_id, c.offset, static_cast<int32_t>(frames)});
  }

  std::vector<std::pair<WorkerName, Variable<float>>> losses;
  Variable<float> rows;  // lazily shared by the frame regressors

  auto frame_rows = [&]() {
    if (!rows.defined()) rows = frames_to_rows(emb);
    return rows;
  };
  auto target_rows = [&](FeatureKind kind) {
    const auto& st = stats(kind);
    const int64_t dim = feature_dim(kind);
    std::vector<float> data(b * frames * dim);
    for (int64_t i = 0; i < b; ++i) {
      FeatureMatrix m;
      switch (kind) {
        case FeatureKind::kLps:
          m = lps(batch[i]);
          break;
        case FeatureKind::kMfcc:
          m = mfcc(batch[i]);
          break;
        default:
          m = prosody(batch[i]);
          break;
      }
      check_arg(m.rows == frames, "trainer: target/embedding frame mismatch");
      standardize(&m, st);
      for (int64_t r = 0; r < frames; ++r) {
        for (int64_t c = 0; c < dim; ++c) {
          data[(i * frames + r) * dim + c] = static_cast<float>(m.at(r, c));
        }
      }
    }
    return Variable<float>::from_data({b * frames, dim}, std::move(data));
  };

  for (WorkerName w : enabled) {
    switch (w) {
      case WorkerName::kWave: {
        auto rec = workers_->wave_decoder().forward(emb, train_phase,
                                                    train_phase);
        losses.emplace_back(w, worker_loss(w, rec, wav));
        break;
      }
      case WorkerName::kLps:
        losses.emplace_back(
            w, worker_loss(w,
                           workers_->regression_head(w).forward(frame_rows()),
                           target_rows(FeatureKind::kLps)));
        break;
      case WorkerName::kMfcc:
        losses.emplace_back(
            w, worker_loss(w,
                           workers_->regression_head(w).forward(frame_rows()),
                           target_rows(FeatureKind::kMfcc)));
        break;
      case WorkerName::kProsody:
        losses.emplace_back(
            w, worker_loss(w,
                           workers_->regression_head(w).forward(frame_rows()),
                           target_rows(FeatureKind::kProsody)));
        break;
      case WorkerName::kLim: {
        std::set<std::string> utts;
        for (const auto& s : slots) utts.insert(s.utterance_id);
        if (utts.size() < 2) break;  // no negative available this batch
        std::vector<FrameSpan> a, p, n;
        for (int64_t i = 0; i < b; ++i) {
          auto t = sample_lim(slots, sampler_rng);
          a.push_back({t.anchor.slot, t.anchor.frame, 1});
          p.push_back({t.positive.slot, t.positive.frame, 1});
          n.push_back({t.negative.slot, t.negative.frame, 1});
        }
        auto& disc = workers_->discriminator(w);
        auto anchors = gather_span(emb, a);
        auto p_pos = disc.forward(concat_cols(anchors, gather_span(emb, p)));
        auto p_neg = disc.forward(concat_cols(anchors, gather_span(emb, n)));
        losses.emplace_back(w, worker_loss(w, p_pos, p_neg));
        break;
      }
      case WorkerName::kGim: {
        auto triples = gim_triples(slots, sampler_rng);
        if (triples.empty()) break;
        auto means = chunk_mean(emb);  // [B, C]
        std::vector<int64_t> ai, pi, ni;
        for (const auto& t : triples) {
          ai.push_back(t.anchor_slot);
          pi.push_back(t.positive_slot);
          ni.push_back(t.negative_slot);
        }
        auto& disc = workers_->discriminator(w);
        auto anchors = gather_rows(means, ai);
        auto p_pos = disc.forward(concat_cols(anchors, gather_rows(means, pi)));
        auto p_neg = disc.forward(concat_cols(anchors, gather_rows(means, ni)));
        losses.emplace_back(w, worker_loss(w, p_pos, p_neg));
        break;
      }
      case WorkerName::kSpc: {
        // One longer context per step, encoded without running-stat updates;
        // chunks are too short to admit any valid anchor.
        std::vector<int64_t> eligible;
        for (size_t i = 0; i < train_set_.size(); ++i) {
          const int64_t len = trimmed_len(
              static_cast<int64_t>(train_set_[i].samples.size()),
              encoder_config_.total_stride());
          if (len / encoder_config_.total_stride() >= spc_min_frames()) {
            eligible.push_back(i);
          }
        }
        if (eligible.empty()) break;
        const Utterance& u = train_set_[eligible[sampler_rng.uniform_int(
            0, static_cast<int64_t>(eligible.size()) - 1)]];
        const int64_t stride = encoder_config_.total_stride();
        const int64_t usable =
            trimmed_len(static_cast<int64_t>(u.samples.size()), stride);
        const int64_t ctx_len = std::min(
            usable, trimmed_len(config_.spc_context_samples, stride));
        const int64_t max_off = usable - ctx_len;
        const int64_t off =
            max_off > 0 ? sampler_rng.uniform_int(0, max_off / stride) * stride
                        : 0;
        AudioChunk ctx = cut_chunk(u, off, ctx_len);
        std::vector<float> data(ctx.samples.begin(), ctx.samples.end());
        auto ctx_wav = Variable<float>::from_data({1, 1, ctx_len},
                                                  std::move(data));
        auto ctx_emb = encoder_->forward(ctx_wav, train_phase,
                                         /*update_running=*/false);
        const int32_t n_ctx = static_cast<int32_t>(ctx_len / stride);
        std::vector<FrameSpan> a, p, n;
        for (int64_t i = 0; i < b; ++i) {
          auto t = sample_spc(n_ctx, sampler_rng);
          a.push_back({0, t.anchor, 1});
          p.push_back({0, t.pos_start, kSpcSpan});
          n.push_back({0, t.neg_start, kSpcSpan});
        }
        auto& disc = workers_->discriminator(w);
        auto anchors = gather_span(ctx_emb, a);
        auto p_pos =
            disc.forward(concat_cols(anchors, gather_span(ctx_emb, p)));
        auto p_neg =
            disc.forward(concat_cols(anchors, gather_span(ctx_emb, n)));
        losses.emplace_back(w, worker_loss(w, p_pos, p_neg));
        break;
      }
    }
  }

  check_arg(!losses.empty(), "trainer: no worker produced a loss");
  std::vector<Variable<float>> scalars;
  StepReport report;
  for (auto& [w, l] : losses) {
    report.losses[w] = static_cast<double>(l.item());
    scalars.push_back(l);
  }
  auto total = average(scalars);
  report.total = static_cast<double>(total.item());
  if (total_out) *total_out = total;
  return report;
}

StepReport Trainer::train_step(const std::vector<AudioChunk>& batch) {
  check_arg(prepared_, "trainer: prepare() must run before training");
  Rng sampler(derive_seed(config_.seed, kStreamSampler,
                          static_cast<uint64_t>(global_step_)));
  Variable<float> total;
  StepReport report = compute_losses(batch, /*train_phase=*/true, sampler,
                                     &total);
  if (!std::isfinite(report.total)) {
    throw std::runtime_error("trainer: non-finite loss, step aborted");
  }
  optimizer_->zero_grad();
  backward(total);
  optimizer_->step();  // rejects non-finite gradients before mutating
  ++global_step_;
  return report;
}

StepReport Trainer::eval_step(const std::vector<AudioChunk>& batch,
                              Rng& sampler_rng) {
  check_arg(prepared_, "trainer: prepare() must run before evaluation");
  return compute_losses(batch, /*train_phase=*/false, sampler_rng, nullptr);
}

std::string Trainer::run(const std::string& out_dir, std::ostream* log,
                         int64_t stop_after_epochs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  prepare();
  const int64_t stop_epoch =
      stop_after_epochs > 0
          ? std::min<int64_t>(config_.epochs, epoch_ + stop_after_epochs)
          : config_.epochs;

  const std::string train_curve = out_dir + "/losses_train.tsv";
  const std::string valid_curve = out_dir + "/losses_valid.tsv";
  const bool fresh = epoch_ == 0;
  {
    std::ofstream tc(train_curve, fresh ? std::ios::trunc : std::ios::app);
    if (fresh) tc << curve_header(config_.enabled_workers) << "\n";
  }
  if (!valid_set_.empty() && fresh) {
    std::ofstream vc(valid_curve, std::ios::trunc);
    vc << curve_header(config_.enabled_workers) << "\n";
  }

  const std::string latest = out_dir + "/checkpoint_latest.pase";
  while (epoch_ < stop_epoch) {
    const int64_t e = epoch_;
    const double lr = lr_at(e, config_);
    optimizer_->set_learning_rate(static_cast<float>(lr));

    auto chunks = epoch_chunks(e);
    std::map<WorkerName, double> sums;
    std::map<WorkerName, int64_t> counts;
    double total_sum = 0;
    int64_t steps = 0;
    for (size_t pos = 0; pos < chunks.size();
         pos += config_.batch_size_chunks) {
      const size_t end =
          std::min(chunks.size(), pos + config_.batch_size_chunks);
      std::vector<AudioChunk> batch(chunks.begin() + pos, chunks.begin() + end);
      auto report = train_step(batch);
      for (const auto& [w, v] : report.losses) {
        sums[w] += v;
        ++counts[w];
      }
      total_sum += report.total;
      ++steps;
    }
    std::map<WorkerName, double> means;
    for (const auto& [w, s] : sums) means[w] = s / counts[w];
    const double total_mean = steps ? total_sum / steps : 0.0;
    {
      std::ofstream tc(train_curve, std::ios::app);
      tc << curve_line(e, lr, config_.enabled_workers, means, total_mean)
         << "\n";
    }
    if (log) {
      (*log) << "epoch " << e << " lr " << lr << " total " << total_mean
             << "\n";
    }

    if (!valid_set_.empty()) {
      Rng vrng(derive_seed(config_.seed, kStreamValid, e));
      std::vector<AudioChunk> vchunks;
      for (const auto& u : valid_set_) {
        const int64_t n = static_cast<int64_t>(u.samples.size());
        const int64_t per = std::max<int64_t>(1, n / config_.chunk_samples);
        for (int64_t k = 0; k < per; ++k) {
          vchunks.push_back(cut_chunk(
              u, std::min(k * config_.chunk_samples,
                          std::max<int64_t>(0, n - config_.chunk_samples)),
              config_.chunk_samples));
        }
      }
      std::map<WorkerName, double> vsums;
      std::map<WorkerName, int64_t> vcounts;
      double vtotal = 0;
      int64_t vsteps = 0;
      for (size_t pos = 0; pos < vchunks.size();
           pos += config_.batch_size_chunks) {
        const size_t end =
            std::min(vchunks.size(), pos + config_.batch_size_chunks);
        std::vector<AudioChunk> batch(vchunks.begin() + pos,
                                      vchunks.begin() + end);
        auto report = eval_step(batch, vrng);
        for (const auto& [w, v] : report.losses) {
          vsums[w] += v;
          ++vcounts[w];
        }
        vtotal += report.total;
        ++vsteps;
      }
      std::map<WorkerName, double> vmeans;
      for (const auto& [w, s] : vsums) vmeans[w] = s / vcounts[w];
      std::ofstream vc(valid_curve, std::ios::app);
      vc << curve_line(e, lr, config_.enabled_workers, vmeans,
                       vsteps ? vtotal / vsteps : 0.0)
         << "\n";
    }

    ++epoch_;  // the checkpoint records the next epoch to run
    save_checkpoint(latest);
  }

  if (epoch_ < config_.epochs) return latest;  // interrupted, resumable
  const std::string final_path = out_dir + "/checkpoint_final.pase";
  save_checkpoint(final_path);
  return final_path;
}

void Trainer::save_checkpoint(const std::string& path) const {
  StateContainer c;
  c.put_meta("kind", "pase-train-state");
  c.put_meta("epoch", std::to_string(epoch_));
  c.put_meta("global_step", std::to_string(global_step_));
  c.put_meta("adam_t", std::to_string(optimizer_->step_count()));
  c.put_meta("config_hash", std::to_string(config_hash_));
  c.put_meta("seed", std::to_string(config_.seed));
  c.put_meta("prepared", prepared_ ? "1" : "0");
  {
    std::string names;
    for (WorkerName w : config_.enabled_workers) {
      if (!names.empty()) names += ",";
      names += worker_name(w);
    }
    c.put_meta("enabled_workers", names);
  }

  auto put_param = [&c](const std::string& name, Variable<float>& v) {
    c.put_f32(name, v.shape(),
              std::vector<float>(v.value().begin(), v.value().end()));
  };
  auto put_buffer = [&c](const std::string& name, std::vector<float>& v) {
    c.put_f32(name, {static_cast<int64_t>(v.size())}, v);
  };
  const_cast<Encoder<float>&>(*encoder_).visit_params(put_param);
  const_cast<Encoder<float>&>(*encoder_).visit_buffers(put_buffer);
  const_cast<WorkerSet<float>&>(*workers_).visit_params(put_param);
  const_cast<WorkerSet<float>&>(*workers_).visit_buffers(put_buffer);

  // Adam moments, keyed by the optimizer's parameter order.
  const auto& params = optimizer_->params();
  auto& m = const_cast<AdamOptimizer<float>&>(*optimizer_).first_moments();
  auto& v = const_cast<AdamOptimizer<float>&>(*optimizer_).second_moments();
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string key = "adam." + std::to_string(i);
    c.put_f32(key + ".m", params[i].shape(), m[i]);
    c.put_f32(key + ".v", params[i].shape(), v[i]);
  }

  for (const auto& [kind, st] : stats_) {
    const std::string key = "stats." + feature_kind_name(kind);
    c.put_f64(key + ".mean", {static_cast<int64_t>(st.mean.size())}, st.mean);
    c.put_f64(key + ".var", {static_cast<int64_t>(st.var.size())}, st.var);
  }
  c.save(path);
}

void Trainer::load_checkpoint(const std::string& path) {
  StateContainer c = StateContainer::load(path);
  check_arg(c.meta("kind") == "pase-train-state",
            "checkpoint '" + path + "': not a training state");
  check_arg(c.meta("config_hash") == std::to_string(config_hash_),
            "checkpoint '" + path + "': config mismatch (hash " +
                c.meta("config_hash") + " vs " + std::to_string(config_hash_) +
                ")");

  auto get_param = [&c](const std::string& name, Variable<float>& v) {
    const auto& data = c.f32(name, v.shape());
    std::copy(data.begin(), data.end(), v.value().begin());
  };
  auto get_buffer = [&c](const std::string& name, std::vector<float>& v) {
    v = c.f32(name, {static_cast<int64_t>(v.size())});
  };
  encoder_->visit_params(get_param);
  encoder_->visit_buffers(get_buffer);
  workers_->visit_params(get_param);
  workers_->visit_buffers(get_buffer);

  const auto& params = optimizer_->params();
  auto& m = optimizer_->first_moments();
  auto& v = optimizer_->second_moments();
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string key = "adam." + std::to_string(i);
    m[i] = c.f32(key + ".m", params[i].shape());
    v[i] = c.f32(key + ".v", params[i].shape());
  }
  optimizer_->set_step_count(std::stoll(c.meta("adam_t")));

  stats_.clear();
  for (FeatureKind kind :
       {FeatureKind::kLps, FeatureKind::kMfcc, FeatureKind::kProsody}) {
    const std::string key = "stats." + feature_kind_name(kind);
    if (!c.has_tensor(key + ".mean")) continue;
    StandardizationStats st;
    st.kind = kind;
    const int64_t dim = feature_dim(kind);
    st.mean = c.f64(key + ".mean", {dim});
    st.var = c.f64(key + ".var", {dim});
    stats_[kind] = st;
  }

  epoch_ = std::stoll(c.meta("epoch"));
  global_step_ = std::stoll(c.meta("global_step"));
  prepared_ = c.meta("prepared") == "1";
}

}  // namespace pase
