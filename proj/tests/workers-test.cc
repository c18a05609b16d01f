// pase/workers-test.cc

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
#include <map>

#include "doctest.h"
#include "pase/gradcheck.h"
#include "pase/workers.h"

using namespace pase;

namespace {

std::vector<double> random_vec(Rng& rng, int64_t n, double lo = -1.0,
                               double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

std::vector<SlotInfo> two_utterance_batch() {
  // Two utterances, two chunks each, 50 frames per chunk.
  return {{"utt_a", 0, 50}, {"utt_a", 16000, 50}, {"utt_b", 0, 50},
          {"utt_b", 8000, 50}};
}

WorkerSetConfig<double> tiny_worker_config() {
  WorkerSetConfig<double> c;
  c.emb_dim = 6;
  c.hidden = 5;
  c.lps_dim = 3;
  c.mfcc_dim = 2;
  c.prosody_dim = 2;
  c.decoder.strides = {2, 2};
  c.decoder.widths = {4, 4};
  c.decoder.channels = {4, 3};
  c.decoder.mlp_hidden = 4;
  return c;
}

}  // namespace

TEST_CASE("worker roster names and kinds") {
  CHECK(kAllWorkers.size() == 7);
  CHECK(parse_worker("MFCC") == WorkerName::kMfcc);
  CHECK_THROWS_WITH_AS(parse_worker("MFC"),
                       doctest::Contains("valid: WAVE, LPS, MFCC, PROSODY, "
                                         "LIM, GIM, SPC"),
                       std::invalid_argument);
  CHECK(worker_is_regression(WorkerName::kWave));
  CHECK_FALSE(worker_is_regression(WorkerName::kSpc));
  CHECK(worker_target_dim(WorkerName::kLps) == 1025);
  CHECK(worker_spec(WorkerName::kGim, false).enabled == false);
}

TEST_CASE("regression heads map embeddings to target dims") {
  Rng rng(1);
  WorkerSetConfig<double> cfg;  // full-size dims
  WorkerSet<double> ws(cfg, 3);
  auto rows = Variabled::from_data({7, 100}, random_vec(rng, 700));
  CHECK(ws.regression_head(WorkerName::kLps).forward(rows).shape() ==
        Shape{7, 1025});
  CHECK(ws.regression_head(WorkerName::kMfcc).forward(rows).shape() ==
        Shape{7, 20});
  CHECK(ws.regression_head(WorkerName::kProsody).forward(rows).shape() ==
        Shape{7, 4});
  CHECK_THROWS_AS(ws.regression_head(WorkerName::kWave),
                  std::invalid_argument);

  // Zeroed parameters leave only the bias.
  RegressionHead<double> head(4, 3, 2, rng);
  head.visit_params("h", [](const std::string&, Variabled& v) {
    for (auto& x : v.value()) x = 0.0;
  });
  auto out = head.forward(Variabled::from_data({2, 4}, random_vec(rng, 8)));
  for (double v : out.value()) CHECK(v == 0.0);
}

TEST_CASE("waveform decoder emits exactly 160x its frame count") {
  WorkerSetConfig<float> cfg;
  WorkerSet<float> ws(cfg, 11);
  CHECK(ws.wave_decoder().upsample_factor() == 160);
  Rng rng(5);
  for (int64_t n : {1, 7, 100, 200}) {
    std::vector<float> data(100 * n);
    for (auto& v : data) v = static_cast<float>(rng.uniform(-1, 1));
    auto emb = Variablef::from_data({1, 100, n}, std::move(data));
    auto wav = ws.wave_decoder().forward(emb, true, false);
    CHECK(wav.shape() == Shape{1, 1, 160 * n});
  }
}

TEST_CASE("discriminators output probabilities and use the pair order") {
  Rng rng(7);
  Discriminator<double> d(8, 6, rng);
  auto pairs = Variabled::from_data({5, 8}, random_vec(rng, 40));
  auto p = d.forward(pairs);
  REQUIRE(p.shape() == Shape{5, 1});
  for (double v : p.value()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }

  // Swapping anchor and candidate halves changes the input, and generically
  // the output (no symmetry is imposed).
  auto a = random_vec(rng, 4), c = random_vec(rng, 4);
  std::vector<double> ac(a), ca(c);
  ac.insert(ac.end(), c.begin(), c.end());
  ca.insert(ca.end(), a.begin(), a.end());
  auto p_ac = d.forward(Variabled::from_data({1, 8}, ac)).item();
  auto p_ca = d.forward(Variabled::from_data({1, 8}, ca)).item();
  CHECK(p_ac != doctest::Approx(p_ca).epsilon(1e-12));

  // Zero weights give sigmoid(0) = 0.5.
  Discriminator<double> dz(8, 6, rng);
  dz.visit_params("d", [](const std::string&, Variabled& v) {
    for (auto& x : v.value()) x = 0.0;
  });
  CHECK(dz.forward(Variabled::from_data({1, 8}, ac)).item() ==
        doctest::Approx(0.5));

  CHECK_THROWS_AS(d.forward(Variabled::from_data({1, 7}, random_vec(rng, 7))),
                  std::invalid_argument);
}

TEST_CASE("LIM sampling contract over 10k seeded draws") {
  auto slots = two_utterance_batch();
  Rng rng(123);
  std::map<int64_t, int64_t> anchor_counts;
  for (int i = 0; i < 10000; ++i) {
    auto t = sample_lim(slots, rng);
    CHECK(slots[t.positive.slot].utterance_id ==
          slots[t.anchor.slot].utterance_id);
    CHECK(slots[t.negative.slot].utterance_id !=
          slots[t.anchor.slot].utterance_id);
    CHECK(t.positive.slot == t.anchor.slot);
    CHECK(t.positive.frame != t.anchor.frame);
    CHECK(t.anchor.frame >= 0);
    CHECK(t.anchor.frame < slots[t.anchor.slot].n_frames);
    ++anchor_counts[t.anchor.slot * 1000 + t.anchor.frame / 5];
  }
  // Uniformity: anchors spread over 4 slots x 10 coarse frame bins; each bin
  // holds 250 draws in expectation, checked at 3 sigma.
  const double expect = 10000.0 / 40.0;
  const double sigma = std::sqrt(10000.0 * (1.0 / 40.0) * (39.0 / 40.0));
  REQUIRE(anchor_counts.size() == 40);
  for (const auto& [bin, count] : anchor_counts) {
    CHECK(std::abs(count - expect) <= 3.0 * sigma);
  }

  // A single-utterance batch is rejected.
  std::vector<SlotInfo> mono{{"u", 0, 50}, {"u", 16000, 50}};
  CHECK_THROWS_AS(sample_lim(mono, rng), std::invalid_argument);
}

TEST_CASE("GIM pairing stays within an utterance, negatives outside") {
  auto slots = two_utterance_batch();
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    auto triples = gim_triples(slots, rng);
    REQUIRE(triples.size() == 2);  // one per utterance with a chunk pair
    for (const auto& t : triples) {
      CHECK(slots[t.anchor_slot].utterance_id ==
            slots[t.positive_slot].utterance_id);
      CHECK(t.anchor_slot != t.positive_slot);
      CHECK(slots[t.anchor_slot].chunk_offset !=
            slots[t.positive_slot].chunk_offset);
      CHECK(slots[t.negative_slot].utterance_id !=
            slots[t.anchor_slot].utterance_id);
    }
  }

  // Same-offset duplicate chunks cannot pair.
  std::vector<SlotInfo> dup{{"a", 0, 50}, {"a", 0, 50}, {"b", 0, 50}};
  CHECK(gim_triples(dup, rng).empty());
  // Without a second utterance there is no negative, hence no triples.
  std::vector<SlotInfo> mono{{"a", 0, 50}, {"a", 16000, 50}};
  CHECK(gim_triples(mono, rng).empty());
}

TEST_CASE("GIM anchors equal exact frame means") {
  Rng rng(13);
  auto enc = Variabled::from_data({2, 3, 4}, random_vec(rng, 24));
  auto means = chunk_mean(enc);
  for (int64_t b = 0; b < 2; ++b) {
    for (int64_t c = 0; c < 3; ++c) {
      double m = 0;
      for (int64_t t = 0; t < 4; ++t) m += enc.value()[(b * 3 + c) * 4 + t];
      m /= 4;
      CHECK(std::abs(means.value()[b * 3 + c] - m) < 1e-10);
    }
  }
}

TEST_CASE("SPC sampling contract over 10k seeded draws") {
  Rng rng(77);
  const int32_t n = 200;
  for (int i = 0; i < 10000; ++i) {
    auto t = sample_spc(n, rng);
    CHECK(t.anchor >= kSpcHeadroom);
    CHECK(t.anchor <= n - 1 - kSpcHeadroom);
    // Positive span strictly in the future, 15..50 frames away.
    const int32_t pos_near = t.pos_start - t.anchor;
    const int32_t pos_far = t.pos_start + kSpcSpan - 1 - t.anchor;
    CHECK(pos_near >= 15);
    CHECK(pos_far <= 50);
    // Negative span strictly in the past, 15..50 frames away.
    const int32_t neg_near = t.anchor - (t.neg_start + kSpcSpan - 1);
    const int32_t neg_far = t.anchor - t.neg_start;
    CHECK(neg_near >= 15);
    CHECK(neg_far <= 50);
    // All indices stay inside the context.
    CHECK(t.neg_start >= 0);
    CHECK(t.pos_start + kSpcSpan <= n);
  }
  CHECK_THROWS_AS(sample_spc(100, rng), std::invalid_argument);
  CHECK(spc_min_frames() == 101);
}

TEST_CASE("worker losses: perfect prediction and reference values") {
  Rng rng(15);
  auto x = Variabled::from_data({8}, random_vec(rng, 8));
  for (WorkerName w : {WorkerName::kWave, WorkerName::kLps, WorkerName::kMfcc,
                       WorkerName::kProsody}) {
    CHECK(worker_loss(w, x, x).item() == doctest::Approx(0.0));
  }
  auto half = Variabled::from_data({1}, {0.5});
  CHECK(worker_loss(WorkerName::kLim, half, half).item() ==
        doctest::Approx(2.0 * std::log(2.0)));

  // Zero predictions against standardized targets give MSE about 1.
  const int64_t n = 5000;
  std::vector<double> z(n);
  double mean = 0;
  for (auto& v : z) {
    v = rng.normal();
    mean += v;
  }
  mean /= n;
  double var = 0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= n;
  for (auto& v : z) v = (v - mean) / std::sqrt(var);
  auto zeros = Variabled::zeros({n});
  auto targets = Variabled::from_data({n}, z);
  CHECK(worker_loss(WorkerName::kMfcc, zeros, targets).item() ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("tiny worker stack passes finite differences") {
  Rng rng(21);
  auto cfg = tiny_worker_config();
  WorkerSet<double> ws(cfg, 33);

  const int64_t batch = 2, frames = 4;
  auto emb = Variabled::from_data({batch, cfg.emb_dim, frames},
                                  random_vec(rng, batch * cfg.emb_dim * frames),
                                  true);
  auto wave_target =
      Variabled::from_data({batch, 1, frames * 4}, random_vec(rng, batch * frames * 4));
  auto lps_target = Variabled::from_data({batch * frames, cfg.lps_dim},
                                         random_vec(rng, batch * frames * 3));
  std::vector<FrameSpan> anchors{{0, 1, 1}, {1, 2, 1}};
  std::vector<FrameSpan> others{{1, 0, 1}, {0, 3, 1}};

  std::set<WorkerName> enabled(kAllWorkers.begin(), kAllWorkers.end());
  auto params = ws.parameters(enabled);
  params.push_back(emb);

  auto build = [&]() {
    std::vector<Variabled> losses;
    losses.push_back(worker_loss(
        WorkerName::kWave, ws.wave_decoder().forward(emb, true, false),
        wave_target));
    auto rows = frames_to_rows(emb);
    losses.push_back(worker_loss(
        WorkerName::kLps, ws.regression_head(WorkerName::kLps).forward(rows),
        lps_target));
    auto a = gather_span(emb, anchors);
    auto o = gather_span(emb, others);
    auto ppos = ws.discriminator(WorkerName::kLim).forward(concat_cols(a, o));
    auto pneg = ws.discriminator(WorkerName::kLim).forward(concat_cols(o, a));
    losses.push_back(worker_loss(WorkerName::kLim, ppos, pneg));
    return average(losses);
  };
  auto report = check_gradients<double>(params, build, 1e-5, 1e-4);
  INFO("worst ", report.worst, " rel ", report.max_rel_err);
  CHECK(report.ok);
}

TEST_CASE("ablation: disabled workers keep params out of the optimizer") {
  WorkerSetConfig<double> cfg = tiny_worker_config();
  WorkerSet<double> ws(cfg, 55);
  std::set<WorkerName> all(kAllWorkers.begin(), kAllWorkers.end());
  std::set<WorkerName> no_mfcc = all;
  no_mfcc.erase(WorkerName::kMfcc);
  const auto full = ws.parameters(all);
  const auto reduced = ws.parameters(no_mfcc);
  CHECK(full.size() == reduced.size() + 5);  // one head: w1,b1,prelu,w2,b2

  // Same seed, different roster: identical initialization everywhere.
  WorkerSet<double> ws2(cfg, 55);
  std::vector<double> a, b;
  ws.visit_params([&](const std::string&, Variabled& v) {
    a.insert(a.end(), v.value().begin(), v.value().end());
  });
  ws2.visit_params([&](const std::string&, Variabled& v) {
    b.insert(b.end(), v.value().begin(), v.value().end());
  });
  CHECK(a == b);
}
