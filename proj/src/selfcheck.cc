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

#include "mtasr/selfcheck.h"

#include <algorithm>

#include "mtasr/ctc.h"
#include "mtasr/fdcheck.h"
#include "mtasr/framewise.h"
#include "mtasr/rng.h"

namespace mtasr {

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

double primitive_sweep(std::uint64_t seed) {
  double worst = 0.0;
  auto run = [&](const LossBuilder& build, const std::vector<Tensor>& params) {
    worst = std::max(worst, finite_difference_check(build, params, 1e-5));
  };
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(mix_seed(seed, s));
    std::size_t n = 2 + rng.index(3);
    std::size_t m = 2 + rng.index(3);
    std::size_t k = 2 + rng.index(3);

    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.matmul(p[0], p[1])); },
        {random_tensor({n, k}, rng), random_tensor({k, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.add(p[0], p[1])); },
        {random_tensor({n, m}, rng), random_tensor({1, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.mul(p[0], p[1])); },
        {random_tensor({n, m}, rng), random_tensor({n, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.concat(1, {p[0], p[1]})); },
        {random_tensor({n, m}, rng), random_tensor({n, k}, rng)});
    run([n](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.slice(p[0], 0, 0, n)); },
        {random_tensor({n + 1, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.tanh(p[0])); },
        {random_tensor({n, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.sigmoid(p[0])); },
        {random_tensor({n, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.exp(p[0])); },
        {random_tensor({n, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.log(p[0])); },
        {random_tensor({n, m}, rng, 0.5, 2.0)});
    // weighted softmax/log_softmax outputs so the gradient is nontrivial
    Tensor w = random_tensor({n, m}, rng);
    run([w](Tape& t, const std::vector<NodeId>& p) {
          return t.sum(t.mul(t.softmax(p[0], 1), t.constant(w)));
        },
        {random_tensor({n, m}, rng)});
    run([w](Tape& t, const std::vector<NodeId>& p) {
          return t.sum(t.mul(t.log_softmax(p[0], 1), t.constant(w)));
        },
        {random_tensor({n, m}, rng)});
    std::vector<int> ids = {0, static_cast<int>(n - 1), 1};
    run([ids](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.embedding(p[0], ids)); },
        {random_tensor({n, m}, rng)});
    run([s](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.dropout(p[0], 0.3, s)); },
        {random_tensor({n, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.sum(p[0], 0)); },
        {random_tensor({n, m}, rng)});
    std::vector<int> picks(n);
    for (std::size_t i = 0; i < n; ++i) picks[i] = static_cast<int>(rng.index(m));
    run([picks](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.pick(p[0], picks)); },
        {random_tensor({n, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.logaddexp(p[0], p[1])); },
        {random_tensor({n, m}, rng), random_tensor({n, m}, rng)});
    run([](Tape& t, const std::vector<NodeId>& p) { return t.sum(t.pyramid_pack(p[0])); },
        {random_tensor({n + 1, m}, rng)});
  }
  return worst;
}

double lstm_cell_sweep(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x15));
  const std::size_t h = 3, in = 3;
  const double c = 0.6;  // active region; saturated gates leave coordinates at the noise floor
  std::vector<Tensor> params = {
      random_tensor({in, 4 * h}, rng, -c, c), random_tensor({h, 4 * h}, rng, -c, c),
      random_tensor({1, 4 * h}, rng, -c, c), random_tensor({1, in}, rng, -c, c),
      random_tensor({1, h}, rng, -c, c),     random_tensor({1, h}, rng, -c, c)};
  auto build = [](Tape& t, const std::vector<NodeId>& p) {
    LstmState s = lstm_cell_step(t, p[3], {p[4], p[5]}, LstmParams{p[0], p[1], p[2]});
    return t.sum(s.h);
  };
  // 3e-5 balances truncation against rounding for the smallest coordinates
  return finite_difference_check(build, params, 3e-5);
}

double encoder_sweep(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xE2));
  const std::size_t h = 3, feat = 4, t_len = 5;
  Tensor features = random_tensor({t_len, feat}, rng);
  std::vector<Tensor> params;
  for (int layer = 0; layer < 2; ++layer) {
    std::size_t in = layer == 0 ? feat : 4 * h;
    for (int dir = 0; dir < 2; ++dir) {
      params.push_back(random_tensor({in, 4 * h}, rng, -0.5, 0.5));
      params.push_back(random_tensor({h, 4 * h}, rng, -0.5, 0.5));
      params.push_back(random_tensor({1, 4 * h}, rng, -0.5, 0.5));
    }
  }
  auto build = [features](Tape& t, const std::vector<NodeId>& p) {
    std::vector<EncoderLayerParams> layers(2);
    layers[0] = {{p[0], p[1], p[2]}, {p[3], p[4], p[5]}};
    layers[1] = {{p[6], p[7], p[8]}, {p[9], p[10], p[11]}};
    EncoderStates enc = encode(t, features, features.rows(), layers, 0.0, 0, false);
    return t.add(t.sum(enc.h[0]), t.sum(enc.h[1]));
  };
  return finite_difference_check(build, params, 1e-5);
}

double attention_sweep(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xA7));
  const std::size_t j = 4, w = 3, hd = 3, a = 4;
  Tensor h = random_tensor({j, w}, rng);
  Tensor d = random_tensor({1, hd}, rng);
  std::vector<Tensor> params = {random_tensor({w, a}, rng), random_tensor({hd, a}, rng),
                                random_tensor({a, 1}, rng), random_tensor({1, a}, rng)};
  auto build = [h, d](Tape& t, const std::vector<NodeId>& p) {
    auto [alpha, ctx] = attend(t, AttendedSeq{t.constant(h), h.rows()}, t.constant(d),
                               AttentionParams{p[0], p[1], p[2], p[3]});
    (void)alpha;
    return t.sum(ctx);
  };
  return finite_difference_check(build, params, 1e-5);
}

double ctc_sweep(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xCC));
  const std::size_t j = 5, w = 3, vocab = 4;
  Tensor h = random_tensor({j, w}, rng);
  std::vector<int> target = {1, 2, 1};
  std::vector<Tensor> params = {random_tensor({w, vocab}, rng)};
  auto build = [h, target](Tape& t, const std::vector<NodeId>& p) {
    TokenSequence z{"phones", target};
    auto loss = ctc_loss(t, AttendedSeq{t.constant(h), h.rows()}, CtcHead{p[0], 0}, z);
    return *loss;
  };
  return finite_difference_check(build, params, 1e-5);
}

double framewise_sweep(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xF5));
  const std::size_t m = 6, w = 3, vocab = 5;
  Tensor h = random_tensor({m, w}, rng);
  std::vector<int> labels(m);
  for (auto& l : labels) l = static_cast<int>(rng.index(vocab));
  std::vector<Tensor> params = {random_tensor({w, vocab}, rng)};
  auto build = [h, labels](Tape& t, const std::vector<NodeId>& p) {
    return framewise_loss(t, AttendedSeq{t.constant(h), h.rows()}, labels, p[0]);
  };
  double full = finite_difference_check(build, params, 1e-5);
  auto build_sampled = [h, labels, seed](Tape& t, const std::vector<NodeId>& p) {
    Rng r(mix_seed(seed, 0x5a));
    return sampled_softmax_loss(t, AttendedSeq{t.constant(h), h.rows()}, labels, p[0], 2, r);
  };
  return std::max(full, finite_difference_check(build_sampled, params, 1e-5));
}

}  // namespace

TinyFixture build_tiny_fixture(std::uint64_t seed) {
  TinyFixture fx;
  fx.model.cfg.feat_dim = 5;
  fx.model.cfg.hidden = 4;
  fx.model.cfg.embed = 4;
  fx.model.cfg.attn = 4;
  fx.model.cfg.enc_layers = 2;
  fx.model.cfg.char_vocab = 5;
  fx.model.cfg.phone_vocab = 6;
  fx.model.cfg.state_vocab = 4;
  fx.model.cfg.aux_tasks = {{TaskType::kPhoneDecoder, 1, 0},
                            {TaskType::kPhoneCtc, 1, 0},
                            {TaskType::kStateFrames, 2, 0}};
  fx.model.cfg.dropout = 0.1;
  fx.model.cfg.sampling_prob = 0.0;  // sampling draws are not differentiable

  fx.model.chars = Vocabulary::from_symbols("chars", {kSosSymbol, kEosSymbol, "a", "b", "c"});
  fx.model.phones =
      Vocabulary::from_symbols("phones", {kBlankSymbol, kSosSymbol, kEosSymbol, "p0", "p1", "p2"});
  fx.model.states = Vocabulary::from_symbols("states", {"s0", "s1", "s2", "s3"});
  fx.model.params = init_params(fx.model.cfg, seed);
  // Training-scale init leaves tanh nearly linear, which makes the attention
  // query gradients vanish below the finite-difference noise floor. The
  // fixture redraws weights wide enough that every parameter has a gradient
  // the check can resolve.
  Rng winit(mix_seed(seed, 0xF1));
  for (std::size_t i = 0; i < fx.model.params.size(); ++i) {
    for (double& v : fx.model.params.at_index(i).data()) v = winit.uniform(-0.8, 0.8);
  }

  Rng rng(mix_seed(seed, 0x71));
  const std::size_t t_len = 12;
  fx.features = random_tensor({t_len, fx.model.cfg.feat_dim}, rng);
  fx.chars = {"chars", {2, 3, 4}};
  fx.phones = {"phones", {3, 4, 5, 3}};
  fx.states.states.resize(t_len);
  for (auto& s : fx.states.states) s = static_cast<int>(rng.index(fx.model.cfg.state_vocab));
  return fx;
}

double tiny_fixture_fd_error(const TinyFixture& fixture, double epsilon) {
  std::vector<Tensor> params;
  params.reserve(fixture.model.params.size());
  for (std::size_t i = 0; i < fixture.model.params.size(); ++i) {
    params.push_back(fixture.model.params.at_index(i));
  }
  auto build = [&fixture](Tape& tape, const std::vector<NodeId>& ids) {
    Binding bind{&tape, &fixture.model.params, ids};
    LossBundle bundle =
        utterance_losses(tape, bind, fixture.model, fixture.features, fixture.features.rows(),
                         fixture.chars, fixture.phones, fixture.states, true, 0x9d2c);
    return bundle.combined;
  };
  return finite_difference_check(build, params, epsilon);
}

std::vector<CheckResult> gradient_selfcheck(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back({"primitives", primitive_sweep(seed), 1e-6});
  out.push_back({"lstm-cell", lstm_cell_sweep(seed), 1e-6});
  out.push_back({"encoder-2layer", encoder_sweep(seed), 1e-5});
  out.push_back({"attention", attention_sweep(seed), 1e-6});
  out.push_back({"ctc", ctc_sweep(seed), 1e-5});
  out.push_back({"framewise", framewise_sweep(seed), 1e-6});
  TinyFixture fx = build_tiny_fixture(seed);
  out.push_back({"full-model", tiny_fixture_fd_error(fx, 1e-4), 1e-4});
  return out;
}

}  // namespace mtasr
