// pase/trainer-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "pase/rng.h"
#include "pase/trainer.h"

using namespace pase;
namespace fs = std::filesystem;

namespace {

EncoderConfig tiny_encoder() {
  EncoderConfig c;
  c.sinc_width = 65;
  c.sinc_filters = 8;
  c.block_widths = {20, 5, 5, 5, 5};
  c.block_filters = {12, 16, 16, 24, 24};
  c.block_strides = {10, 2, 2, 2, 2};  // x160 total
  c.embedding_dim = 12;
  return c;
}

WorkerSetConfig<float> tiny_workers() {
  WorkerSetConfig<float> w;
  w.emb_dim = 12;
  w.hidden = 16;
  w.decoder.strides = {4, 4, 10};
  w.decoder.widths = {8, 8, 20};
  w.decoder.channels = {8, 6, 4};
  w.decoder.mlp_hidden = 8;
  return w;
}

TrainConfig tiny_train(uint64_t seed = 5) {
  TrainConfig t;
  t.chunk_samples = 1600;
  t.spc_context_samples = 17600;
  t.batch_size_chunks = 16;
  t.epochs = 2;
  t.seed = seed;
  return t;
}

std::vector<Utterance> toy_corpus(int n_utts = 4, int64_t len = 19200) {
  Rng rng(99);
  std::vector<Utterance> utts;
  for (int u = 0; u < n_utts; ++u) {
    Utterance utt;
    utt.id = "utt" + std::to_string(u);
    utt.samples.resize(len);
    const double f0 = 110.0 * std::pow(1.3, u);
    for (int64_t i = 0; i < len; ++i) {
      double v = 0.4 * std::sin(2.0 * M_PI * f0 * i / 16000.0) +
                 0.2 * std::sin(2.0 * M_PI * 2 * f0 * i / 16000.0) +
                 0.02 * rng.normal();
      utt.samples[i] = static_cast<float>(v);
    }
    utts.push_back(std::move(utt));
  }
  return utts;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

fs::path temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("pase-trainer-test-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("learning rate schedule") {
  TrainConfig c;
  CHECK(lr_at(0, c) == doctest::Approx(5e-4));
  CHECK(lr_at(29, c) == doctest::Approx(5e-4));
  CHECK(lr_at(30, c) == doctest::Approx(2.5e-4));
  CHECK(lr_at(60, c) == doctest::Approx(1.25e-4));
  std::set<double> values;
  for (int64_t e = 0; e < 150; ++e) {
    values.insert(lr_at(e, c));
    if (e > 0 && e % 30 != 0) CHECK(lr_at(e, c) == lr_at(e - 1, c));
  }
  CHECK(values.size() == 5);
}

TEST_CASE("ablation config drops exactly one worker") {
  TrainConfig base;
  auto dropped = ablation_config(base, WorkerName::kMfcc);
  CHECK(dropped.enabled_workers.size() == 6);
  CHECK_FALSE(dropped.enabled_workers.count(WorkerName::kMfcc));

  TrainConfig only_mfcc;
  only_mfcc.enabled_workers = {WorkerName::kMfcc};
  CHECK_THROWS_AS(ablation_config(only_mfcc, WorkerName::kMfcc),
                  std::invalid_argument);
}

TEST_CASE("total loss is the exact mean over contributing workers") {
  Trainer tr(tiny_train(), tiny_encoder(), tiny_workers(), toy_corpus(), {});
  tr.prepare();
  auto batch = tr.epoch_chunks(0);
  batch.resize(16);
  auto report = tr.train_step(batch);
  REQUIRE(report.losses.size() == 7);  // every worker contributed
  double sum = 0;
  for (const auto& [w, v] : report.losses) {
    CHECK(v >= 0.0);
    sum += v;
  }
  // average() accumulates in double in the same order, then narrows.
  CHECK(report.total ==
        static_cast<double>(static_cast<float>(sum / report.losses.size())));

  // Disabling a worker changes the denominator.
  auto cfg6 = ablation_config(tiny_train(), WorkerName::kSpc);
  Trainer tr6(cfg6, tiny_encoder(), tiny_workers(), toy_corpus(), {});
  tr6.prepare();
  auto report6 = tr6.train_step(batch);
  CHECK(report6.losses.size() == 6);
}

TEST_CASE("same seed, same data: identical first steps") {
  auto mk = [] {
    return Trainer(tiny_train(7), tiny_encoder(), tiny_workers(), toy_corpus(),
                   {});
  };
  Trainer a = mk(), b = mk();
  a.prepare();
  b.prepare();
  auto batch = a.epoch_chunks(0);
  batch.resize(16);
  auto ra1 = a.train_step(batch);
  auto rb1 = b.train_step(batch);
  CHECK(ra1.total == rb1.total);
  for (const auto& [w, v] : ra1.losses) CHECK(v == rb1.losses.at(w));
  auto ra2 = a.train_step(batch);
  auto rb2 = b.train_step(batch);
  CHECK(ra2.total == rb2.total);
  CHECK(ra2.total != ra1.total);  // the step moved the parameters
}

TEST_CASE("WAVE-only zero-gradient limit leaves parameters unchanged") {
  TrainConfig cfg = tiny_train();
  cfg.enabled_workers = {WorkerName::kWave};
  Trainer tr(cfg, tiny_encoder(), tiny_workers(), toy_corpus(), {});
  tr.prepare();

  // Zero every decoder parameter: the reconstruction of silence is exact.
  tr.workers().wave_decoder().visit_params(
      "w", [](const std::string&, Variablef& v) {
        for (auto& x : v.value()) x = 0.0f;
      });
  std::vector<float> before;
  tr.encoder().visit_params([&](const std::string&, Variablef& v) {
    before.insert(before.end(), v.value().begin(), v.value().end());
  });

  std::vector<AudioChunk> silence(4);
  for (int i = 0; i < 4; ++i) {
    silence[i].samples.assign(1600, 0.0f);
    silence[i].utterance_id = "s" + std::to_string(i);
  }
  auto report = tr.train_step(silence);
  CHECK(report.total == 0.0);
  CHECK(report.losses.at(WorkerName::kWave) == 0.0);

  std::vector<float> after;
  tr.encoder().visit_params([&](const std::string&, Variablef& v) {
    after.insert(after.end(), v.value().begin(), v.value().end());
  });
  CHECK(before == after);
}

TEST_CASE("steps before prepare() are rejected") {
  Trainer tr(tiny_train(), tiny_encoder(), tiny_workers(), toy_corpus(), {});
  auto batch = tr.epoch_chunks(0);
  batch.resize(4);
  CHECK_THROWS_AS(tr.train_step(batch), std::invalid_argument);
}

TEST_CASE("checkpoint round-trip restores every tensor") {
  auto dir = temp_dir("ckpt");
  Trainer a(tiny_train(11), tiny_encoder(), tiny_workers(), toy_corpus(), {});
  a.prepare();
  auto batch = a.epoch_chunks(0);
  batch.resize(16);
  a.train_step(batch);
  const std::string path = (dir / "state.pase").string();
  a.save_checkpoint(path);

  Trainer b(tiny_train(11), tiny_encoder(), tiny_workers(), toy_corpus(), {});
  b.load_checkpoint(path);
  std::vector<float> va, vb;
  a.encoder().visit_params([&](const std::string&, Variablef& v) {
    va.insert(va.end(), v.value().begin(), v.value().end());
  });
  b.encoder().visit_params([&](const std::string&, Variablef& v) {
    vb.insert(vb.end(), v.value().begin(), v.value().end());
  });
  CHECK(va == vb);
  CHECK(b.global_step() == 1);
  CHECK(b.prepared());

  // Continued training from the restored state matches exactly.
  auto ra = a.train_step(batch);
  auto rb = b.train_step(batch);
  CHECK(ra.total == rb.total);

  // Corruption is rejected outright.
  std::string bytes = read_file(path);
  bytes[bytes.size() / 2] ^= 0x5a;
  const std::string bad = (dir / "bad.pase").string();
  std::ofstream(bad, std::ios::binary) << bytes;
  CHECK_THROWS_AS(b.load_checkpoint(bad), std::runtime_error);

  // A checkpoint from a different config (seed) is refused.
  Trainer c(tiny_train(12), tiny_encoder(), tiny_workers(), toy_corpus(), {});
  CHECK_THROWS_WITH_AS(c.load_checkpoint(path),
                       doctest::Contains("config mismatch"),
                       std::invalid_argument);
}

TEST_CASE("interrupted run resumes bit-identically") {
  auto corpus = toy_corpus(3);
  TrainConfig cfg = tiny_train(21);
  cfg.epochs = 4;

  auto dir_a = temp_dir("resume-a");
  Trainer a(cfg, tiny_encoder(), tiny_workers(), corpus, {});
  const std::string final_a = a.run(dir_a.string(), nullptr);

  auto dir_b = temp_dir("resume-b");
  {
    Trainer b1(cfg, tiny_encoder(), tiny_workers(), corpus, {});
    b1.run(dir_b.string(), nullptr, /*stop_after_epochs=*/2);
  }
  Trainer b2(cfg, tiny_encoder(), tiny_workers(), corpus, {});
  b2.load_checkpoint((dir_b / "checkpoint_latest.pase").string());
  CHECK(b2.epoch() == 2);
  const std::string final_b = b2.run(dir_b.string(), nullptr);

  CHECK(read_file(final_a) == read_file(final_b));
  CHECK(read_file((dir_a / "losses_train.tsv").string()) ==
        read_file((dir_b / "losses_train.tsv").string()));
}

TEST_CASE("loss trend: a tiny corpus is learnable") {
  TrainConfig cfg = tiny_train(31);
  cfg.learning_rate = 2e-3;
  cfg.randomize_chunk_offsets = false;
  Trainer tr(cfg, tiny_encoder(), tiny_workers(), toy_corpus(2, 20800), {});
  tr.prepare();
  auto chunks = tr.epoch_chunks(0);
  chunks.resize(12);
  double first = 0, last = 0;
  for (int step = 0; step < 30; ++step) {
    auto r = tr.train_step(chunks);
    if (step == 0) first = r.total;
    last = r.total;
  }
  CHECK(last < first);
}

TEST_CASE("curve lines carry one column per enabled worker") {
  std::set<WorkerName> enabled{WorkerName::kWave, WorkerName::kGim};
  CHECK(curve_header(enabled) == "#epoch\tlr\tWAVE\tGIM\ttotal");
  std::map<WorkerName, double> losses{{WorkerName::kWave, 0.25}};
  auto line = curve_line(3, 5e-4, enabled, losses, 0.25);
  CHECK(line == "3\t0.0005\t0.25\tnan\t0.25");
}

TEST_CASE("validation curve is written when a valid split exists") {
  auto dir = temp_dir("valid");
  TrainConfig cfg = tiny_train(41);
  cfg.epochs = 1;
  Trainer tr(cfg, tiny_encoder(), tiny_workers(), toy_corpus(3),
             toy_corpus(1));
  tr.run(dir.string(), nullptr);
  CHECK(fs::exists(dir / "losses_valid.tsv"));
  std::ifstream vc(dir / "losses_valid.tsv");
  std::string header, line;
  std::getline(vc, header);
  std::getline(vc, line);
  CHECK(header == curve_header(cfg.enabled_workers));
  CHECK(!line.empty());
}
