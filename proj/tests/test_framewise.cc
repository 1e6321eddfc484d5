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

#include "mtasr/fdcheck.h"
#include "mtasr/framewise.h"
#include "mtasr/rng.h"

using namespace mtasr;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("subsampling keeps the first label of each pair") {
  CHECK(subsample_labels({10, 11, 12, 13}) == std::vector<int>{10, 12});
  CHECK(subsample_labels({10, 11, 12}) == std::vector<int>{10, 12});
  CHECK(subsample_labels({10}) == std::vector<int>{10});
}

TEST_CASE("subsampled length matches the halved resolution for every T") {
  Rng rng(1);
  for (std::size_t frames = 1; frames <= 200; ++frames) {
    std::vector<int> states(frames);
    for (auto& s : states) s = static_cast<int>(rng.index(6));
    CHECK(subsample_labels(states).size() == (frames + 1) / 2);
    CHECK(subsample_to_layer(states, 1).size() == frames);
    CHECK(subsample_to_layer(states, 3).size() == (((frames + 1) / 2) + 1) / 2);
  }
}

TEST_CASE("uniform state distributions score M ln S") {
  const std::size_t m = 7, w = 3, vocab = 4;
  Tape t;
  Rng rng(2);
  Tensor h = random_tensor({m, w}, rng);
  NodeId proj = t.constant(Tensor({w, vocab}));  // zero weights -> uniform softmax
  std::vector<int> labels(m, 1);
  double loss = t.value(framewise_loss(t, {t.constant(h), m}, labels, proj)).scalar_value();
  CHECK(loss == doctest::Approx(static_cast<double>(m) * std::log(vocab)).epsilon(1e-12));
}

TEST_CASE("a single frame reduces to one cross-entropy term") {
  Rng rng(3);
  Tape t;
  Tensor h = random_tensor({1, 3}, rng);
  Tensor proj = random_tensor({3, 4}, rng);
  NodeId pn = t.constant(proj);
  double loss = t.value(framewise_loss(t, {t.constant(h), 1}, {2}, pn)).scalar_value();
  const Tensor dist = t.value(t.softmax(t.matmul(t.constant(h), pn), 1));
  CHECK(loss == doctest::Approx(-std::log(dist.at(0, 2))).epsilon(1e-12));
  CHECK(loss >= 0.0);
}

TEST_CASE("framewise errors: label range and length mismatch") {
  Rng rng(4);
  Tape t;
  Tensor h = random_tensor({3, 3}, rng);
  NodeId proj = t.constant(random_tensor({3, 4}, rng));
  CHECK_THROWS_AS(framewise_loss(t, {t.constant(h), 3}, {0, 9, 1}, proj), Error);
  CHECK_THROWS_AS(framewise_loss(t, {t.constant(h), 3}, {0, 1}, proj), Error);
}

TEST_CASE("framewise gradients pass finite differences") {
  Rng rng(5);
  const std::size_t m = 5, w = 3, vocab = 4;
  Tensor h = random_tensor({m, w}, rng);
  std::vector<int> labels(m);
  for (auto& l : labels) l = static_cast<int>(rng.index(vocab));
  std::vector<Tensor> params = {random_tensor({w, vocab}, rng, -0.8, 0.8)};
  auto build = [h, labels](Tape& t, const std::vector<NodeId>& p) {
    return framewise_loss(t, {t.constant(h), h.rows()}, labels, p[0]);
  };
  CHECK(finite_difference_check(build, params, 3e-5) < 1e-6);
}

TEST_CASE("full-support sampling equals the exact loss") {
  Rng rng(6);
  const std::size_t m = 4, w = 3, vocab = 5;
  Tape t;
  Tensor h = random_tensor({m, w}, rng);
  NodeId proj = t.constant(random_tensor({w, vocab}, rng));
  std::vector<int> labels = {0, 3, 2, 4};
  double exact = t.value(framewise_loss(t, {t.constant(h), m}, labels, proj)).scalar_value();
  Rng sampler(7);
  double sampled =
      t.value(sampled_softmax_loss(t, {t.constant(h), m}, labels, proj, vocab - 1, sampler))
          .scalar_value();
  CHECK(std::fabs(sampled - exact) < 1e-9);

  // n >= vocab clamps to the full support
  Rng sampler2(8);
  double clamped =
      t.value(sampled_softmax_loss(t, {t.constant(h), m}, labels, proj, vocab + 3, sampler2))
          .scalar_value();
  CHECK(std::fabs(clamped - exact) < 1e-9);
}

TEST_CASE("sampled softmax replays deterministically under a fixed seed") {
  Rng rng(9);
  const std::size_t m = 6, w = 3, vocab = 20;
  Tensor h = random_tensor({m, w}, rng);
  Tensor proj = random_tensor({w, vocab}, rng);
  std::vector<int> labels(m);
  for (auto& l : labels) l = static_cast<int>(rng.index(vocab));
  auto run = [&](std::uint64_t seed) {
    Tape t;
    Rng sampler(seed);
    return t
        .value(sampled_softmax_loss(t, {t.constant(h), m}, labels, t.constant(proj), 5, sampler))
        .scalar_value();
  };
  CHECK(run(11) == run(11));
  CHECK(run(11) != run(12));
}

TEST_CASE("sampled gradients average toward the full-softmax direction") {
  Rng rng(10);
  const std::size_t m = 8, w = 6, vocab = 50;
  Tensor h = random_tensor({m, w}, rng);
  Tensor proj = random_tensor({w, vocab}, rng, -0.5, 0.5);
  std::vector<int> labels(m);
  for (auto& l : labels) l = static_cast<int>(rng.index(vocab));

  Tape t;
  NodeId pn = t.parameter(proj);
  NodeId full = framewise_loss(t, {t.constant(h), m}, labels, pn);
  const Tensor full_grad = t.backward(full).at(pn);

  Tensor mean_grad({w, vocab});
  const int n_seeds = 1000;
  for (int s = 0; s < n_seeds; ++s) {
    Tape ts;
    NodeId ps = ts.parameter(proj);
    Rng sampler(mix_seed(777, static_cast<std::uint64_t>(s)));
    NodeId loss = sampled_softmax_loss(ts, {ts.constant(h), m}, labels, ps, 10, sampler);
    const Tensor g = ts.backward(loss).at(ps);
    for (std::size_t i = 0; i < g.numel(); ++i) mean_grad.at(i) += g.at(i) / n_seeds;
  }

  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < mean_grad.numel(); ++i) {
    dot += mean_grad.at(i) * full_grad.at(i);
    na += mean_grad.at(i) * mean_grad.at(i);
    nb += full_grad.at(i) * full_grad.at(i);
  }
  double cosine = dot / std::sqrt(na * nb);
  CHECK(cosine > 0.9);
}

TEST_CASE("sampled softmax gradients pass finite differences") {
  Rng rng(11);
  const std::size_t m = 4, w = 3, vocab = 6;
  Tensor h = random_tensor({m, w}, rng);
  std::vector<int> labels = {1, 5, 0, 3};
  std::vector<Tensor> params = {random_tensor({w, vocab}, rng, -0.8, 0.8)};
  auto build = [h, labels](Tape& t, const std::vector<NodeId>& p) {
    Rng sampler(13);
    return sampled_softmax_loss(t, {t.constant(h), h.rows()}, labels, p[0], 2, sampler);
  };
  CHECK(finite_difference_check(build, params, 3e-5) < 1e-6);
}
