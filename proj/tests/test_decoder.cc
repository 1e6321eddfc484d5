// Copyright 2026 The mtasr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtasr/decoder.h"
#include "mtasr/fdcheck.h"
#include "mtasr/rng.h"

using namespace mtasr;

namespace {

constexpr int kSos = 0;
constexpr int kEos = 1;

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -0.6, double hi = 0.6) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// vocab {sos, eos, a, b}; encoder width w, decoder hidden hd, attention a.
DecoderParams random_decoder(Tape& t, Rng& rng, std::size_t w, std::size_t hd, std::size_t attn,
                             std::size_t vocab, std::size_t embed) {
  DecoderParams p;
  p.lstm = {t.constant(random_tensor({embed + w, 4 * hd}, rng)),
            t.constant(random_tensor({hd, 4 * hd}, rng)),
            t.constant(random_tensor({1, 4 * hd}, rng))};
  p.att = {t.constant(random_tensor({w, attn}, rng)), t.constant(random_tensor({hd, attn}, rng)),
           t.constant(random_tensor({attn, 1}, rng)),
           t.constant(random_tensor({1, attn}, rng))};
  p.out = {t.constant(random_tensor({w + hd, vocab}, rng)),
           t.constant(random_tensor({1, vocab}, rng)),
           t.constant(random_tensor({vocab, embed}, rng)), kSos, kEos};
  return p;
}

AttentionParams random_attention(Tape& t, Rng& rng, std::size_t w, std::size_t hd,
                                 std::size_t attn) {
  return {t.constant(random_tensor({w, attn}, rng)), t.constant(random_tensor({hd, attn}, rng)),
          t.constant(random_tensor({attn, 1}, rng)), t.constant(random_tensor({1, attn}, rng))};
}

}  // namespace

TEST_CASE("attention over a single state returns it exactly") {
  Rng rng(1);
  Tape t;
  Tensor h = random_tensor({1, 3}, rng);
  auto [alpha, ctx] = attend(t, {t.constant(h), 1}, t.constant(random_tensor({1, 2}, rng)),
                             random_attention(t, rng, 3, 2, 4));
  CHECK(t.value(alpha).at(0, 0) == 1.0);
  for (std::size_t j = 0; j < 3; ++j) CHECK(t.value(ctx).at(0, j) == h.at(0, j));
}

TEST_CASE("zero score vector gives uniform attention and the mean context") {
  Rng rng(2);
  Tape t;
  const std::size_t j_len = 5, w = 3;
  Tensor h = random_tensor({j_len, w}, rng);
  AttentionParams att{t.constant(random_tensor({w, 4}, rng)),
                      t.constant(random_tensor({2, 4}, rng)), t.constant(Tensor({4, 1})),
                      t.constant(random_tensor({1, 4}, rng))};
  auto [alpha, ctx] = attend(t, {t.constant(h), j_len}, t.constant(random_tensor({1, 2}, rng)), att);
  for (std::size_t i = 0; i < j_len; ++i) {
    CHECK(t.value(alpha).at(i, 0) == doctest::Approx(1.0 / j_len).epsilon(1e-12));
  }
  for (std::size_t c = 0; c < w; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < j_len; ++i) mean += h.at(i, c);
    mean /= static_cast<double>(j_len);
    CHECK(t.value(ctx).at(0, c) == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("attention parameter gradients pass finite differences") {
  Rng rng(3);
  const std::size_t j_len = 4, w = 3, hd = 3, attn = 4;
  Tensor h = random_tensor({j_len, w}, rng);
  Tensor d = random_tensor({1, hd}, rng);
  std::vector<Tensor> params = {random_tensor({w, attn}, rng), random_tensor({hd, attn}, rng),
                                random_tensor({attn, 1}, rng), random_tensor({1, attn}, rng)};
  auto build = [h, d](Tape& t, const std::vector<NodeId>& p) {
    auto [alpha, ctx] =
        attend(t, {t.constant(h), h.rows()}, t.constant(d), AttentionParams{p[0], p[1], p[2], p[3]});
    (void)alpha;
    return t.sum(ctx);
  };
  CHECK(finite_difference_check(build, params, 3e-5) < 1e-6);
}

TEST_CASE("attention gives exactly zero weight to padded rows") {
  Rng rng(4);
  Tape t;
  const std::size_t valid = 3, padded = 6, w = 3;
  Tensor h({padded, w});
  for (std::size_t i = 0; i < valid; ++i) {
    for (std::size_t j = 0; j < w; ++j) h.at(i, j) = rng.uniform(-1.0, 1.0);
  }
  auto [alpha, ctx] = attend(t, {t.constant(h), valid}, t.constant(random_tensor({1, 2}, rng)),
                             random_attention(t, rng, w, 2, 4));
  (void)ctx;
  double mass = 0.0;
  for (std::size_t i = 0; i < padded; ++i) {
    double a = t.value(alpha).at(i, 0);
    if (i >= valid) CHECK(a == 0.0);
    mass += a;
  }
  CHECK(std::fabs(mass - 1.0) < 1e-6);
}

TEST_CASE("decoder step emits a normalized distribution") {
  Rng rng(5);
  Tape t;
  Tensor h = random_tensor({4, 4}, rng);
  DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
  DecoderState s0 = decoder_initial_state(t, 3, 4);
  StepResult step = decoder_step(t, kSos, s0, p, {t.constant(h), 4});
  double sum = 0.0;
  for (std::size_t j = 0; j < 5; ++j) sum += t.value(step.dist).at(0, j);
  CHECK(std::fabs(sum - 1.0) < 1e-9);
  CHECK_THROWS_AS(decoder_step(t, 99, s0, p, {t.constant(h), 4}), Error);
}

TEST_CASE("the first step runs from the SOS embedding and a zero context") {
  Rng rng(6);
  Tape t;
  Tensor h = random_tensor({3, 4}, rng);
  DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
  NodeId hc = t.constant(h);
  DecoderState s0 = decoder_initial_state(t, 3, 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(t.value(s0.ctx).at(i) == 0.0);
  StepResult via_step = decoder_step(t, kSos, s0, p, {hc, 3});

  // manual reconstruction of step 1
  NodeId emb = t.embedding(p.out.embedding, {kSos});
  LstmState manual = lstm_cell_step(t, t.concat(1, {emb, s0.ctx}), {s0.d, s0.cell}, p.lstm);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t.value(via_step.state.d).at(i) == t.value(manual.h).at(i));
  }
}

TEST_CASE("zero output weights reduce the posterior to softmax of the bias") {
  Rng rng(7);
  Tape t;
  Tensor h = random_tensor({3, 4}, rng);
  Tensor bias = random_tensor({1, 5}, rng);
  DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
  p.out.w_s = t.constant(Tensor({4 + 3, 5}));
  p.out.b_s = t.constant(bias);
  StepResult step =
      decoder_step(t, kSos, decoder_initial_state(t, 3, 4), p, {t.constant(h), 3});
  const Tensor expect = t.value(t.softmax(t.constant(bias), 1));
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(t.value(step.dist).at(0, j) == doctest::Approx(expect.at(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("teacher forcing without sampling is deterministic and non-negative") {
  Rng wrng(8);
  Tensor h_val;
  auto run = [&](std::uint64_t rng_seed) {
    Rng rng(9);
    Tape t;
    Tensor h = random_tensor({4, 4}, rng);
    DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
    Rng sampler(rng_seed);
    TokenSequence target{"chars", {2, 3, 2}};
    return t.value(teacher_forced_loss(t, {t.constant(h), 4}, target, 0.0, sampler, p))
        .scalar_value();
  };
  double a = run(1), b = run(12345);
  CHECK(a == b);
  CHECK(a >= 0.0);
}

TEST_CASE("a uniform model scores (K+1) ln V") {
  Rng rng(10);
  Tape t;
  Tensor h = random_tensor({4, 4}, rng);
  DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
  p.out.w_s = t.constant(Tensor({7, 5}));
  p.out.b_s = t.constant(Tensor({1, 5}));
  Rng sampler(1);
  TokenSequence target{"chars", {2, 3, 2, 4}};
  double loss =
      t.value(teacher_forced_loss(t, {t.constant(h), 4}, target, 0.0, sampler, p)).scalar_value();
  CHECK(loss == doctest::Approx(5.0 * std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("teacher-forced loss equals independently recomputed per-step cross-entropies") {
  Rng rng(11);
  Tape t;
  Tensor h = random_tensor({5, 4}, rng);
  DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
  TokenSequence target{"chars", {2, 4, 3}};
  Rng sampler(1);
  DecodeTrace trace;
  double loss = t.value(teacher_forced_loss(t, {t.constant(h), 5}, target, 0.0, sampler, p, &trace))
                    .scalar_value();

  // oracle: replay decoder_step by hand and sum -log p(target_t)
  double manual = 0.0;
  DecoderState state = decoder_initial_state(t, 3, 4);
  int input = kSos;
  std::vector<int> want = {2, 4, 3, kEos};
  for (std::size_t step_i = 0; step_i < want.size(); ++step_i) {
    StepResult step = decoder_step(t, input, state, p, {t.constant(h), 5});
    state = step.state;
    manual += -std::log(t.value(step.dist).at(0, static_cast<std::size_t>(want[step_i])));
    if (step_i < target.tokens.size()) input = target.tokens[step_i];
  }
  CHECK(loss == doctest::Approx(manual).epsilon(1e-10));

  // attention rows normalize at every step
  REQUIRE(trace.alphas.size() == 4);
  for (const Tensor& alpha : trace.alphas) {
    double mass = 0.0;
    for (double v : alpha.data()) mass += v;
    CHECK(std::fabs(mass - 1.0) < 1e-6);
  }
}

TEST_CASE("teacher forcing rejects an empty target") {
  Rng rng(12);
  Tape t;
  Tensor h = random_tensor({3, 4}, rng);
  DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
  Rng sampler(1);
  TokenSequence empty{"chars", {}};
  CHECK_THROWS_AS(teacher_forced_loss(t, {t.constant(h), 3}, empty, 0.0, sampler, p), Error);
}

TEST_CASE("context vectors stay inside the coordinate-wise hull of the states") {
  Rng rng(13);
  Tape t;
  const std::size_t j_len = 6, w = 4;
  Tensor h = random_tensor({j_len, w}, rng, -2.0, 2.0);
  DecoderParams p = random_decoder(t, rng, w, 3, 3, 5, 2);
  DecoderState state = decoder_initial_state(t, 3, w);
  int input = kSos;
  for (int step_i = 0; step_i < 5; ++step_i) {
    StepResult step = decoder_step(t, input, state, p, {t.constant(h), j_len});
    state = step.state;
    for (std::size_t c = 0; c < w; ++c) {
      double lo = h.at(0, c), hi = h.at(0, c);
      for (std::size_t i = 1; i < j_len; ++i) {
        lo = std::min(lo, h.at(i, c));
        hi = std::max(hi, h.at(i, c));
      }
      CHECK(t.value(state.ctx).at(0, c) >= lo - 1e-12);
      CHECK(t.value(state.ctx).at(0, c) <= hi + 1e-12);
    }
    input = (input + 1) % 5;
  }
}

TEST_CASE("greedy decoding stops at EOS, caps length, ignores logit shifts") {
  Rng rng(14);
  Tape t;
  Tensor h = random_tensor({4, 4}, rng);

  // bias forces EOS immediately
  DecoderParams eos_model = random_decoder(t, rng, 4, 3, 3, 5, 2);
  Tensor eos_bias({1, 5});
  eos_bias.at(0, kEos) = 50.0;
  eos_model.out.w_s = t.constant(Tensor({7, 5}));
  eos_model.out.b_s = t.constant(eos_bias);
  CHECK(greedy_decode(t, {t.constant(h), 4}, 8, eos_model, "chars").tokens.empty());

  // a never-EOS model hits the cap
  DecoderParams chatty = random_decoder(t, rng, 4, 3, 3, 5, 2);
  Tensor no_eos({1, 5});
  no_eos.at(0, kEos) = -50.0;
  chatty.out.b_s = t.constant(no_eos);
  for (std::size_t cap : {1u, 3u, 7u}) {
    CHECK(greedy_decode(t, {t.constant(h), 4}, cap, chatty, "chars").tokens.size() <= cap);
  }

  // adding a constant to every logit leaves the path unchanged
  DecoderParams base = random_decoder(t, rng, 4, 3, 3, 5, 2);
  DecoderParams shifted = base;
  Tensor shift_bias = t.value(base.out.b_s);
  for (double& v : shift_bias.data()) v += 3.7;
  shifted.out.b_s = t.constant(shift_bias);
  TokenSequence a = greedy_decode(t, {t.constant(h), 4}, 12, base, "chars");
  TokenSequence b = greedy_decode(t, {t.constant(h), 4}, 12, shifted, "chars");
  CHECK(a.tokens == b.tokens);
}

TEST_CASE("scheduled sampling changes inputs but keeps the loss finite") {
  Rng rng(15);
  Tape t;
  Tensor h = random_tensor({5, 4}, rng);
  DecoderParams p = random_decoder(t, rng, 4, 3, 3, 5, 2);
  TokenSequence target{"chars", {2, 3, 4, 2, 3}};
  Rng s1(77);
  double sampled =
      t.value(teacher_forced_loss(t, {t.constant(h), 5}, target, 1.0, s1, p)).scalar_value();
  CHECK(std::isfinite(sampled));
  CHECK(sampled >= 0.0);
  Rng s2(77);
  double replay =
      t.value(teacher_forced_loss(t, {t.constant(h), 5}, target, 1.0, s2, p)).scalar_value();
  CHECK(sampled == replay);
}
