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

#include "mtasr/ctc.h"
#include "mtasr/fdcheck.h"
#include "mtasr/rng.h"

using namespace mtasr;

namespace {

// random per-frame distributions via softmax of random logits
Tensor random_dist(std::size_t frames, std::size_t vocab, Rng& rng) {
  Tensor probs({frames, vocab});
  for (std::size_t t = 0; t < frames; ++t) {
    double sum = 0.0;
    for (std::size_t v = 0; v < vocab; ++v) {
      probs.at(t, v) = std::exp(rng.uniform(-2.0, 2.0));
      sum += probs.at(t, v);
    }
    for (std::size_t v = 0; v < vocab; ++v) probs.at(t, v) /= sum;
  }
  return probs;
}

Tensor log_of(const Tensor& probs) {
  Tensor lp = probs;
  for (double& v : lp.data()) v = std::log(v);
  return lp;
}

double forward_loss(const Tensor& probs, const std::vector<int>& z) {
  Tape t;
  auto loss = ctc_log_forward(t, t.constant(log_of(probs)), z, 0);
  REQUIRE(loss.has_value());
  return t.value(*loss).scalar_value();
}

}  // namespace

TEST_CASE("collapse merges repeats then strips blanks") {
  const int blank = 0, a = 1, b = 2;
  CHECK(ctc_collapse({a, a, blank, a, b}) == std::vector<int>{a, a, b});
  CHECK(ctc_collapse({blank, blank}) == std::vector<int>{});
  CHECK(ctc_collapse({a, b, b}) == std::vector<int>{a, b});
}

TEST_CASE("two uniform frames over {blank, a} score -ln 0.75 for target [a]") {
  Tensor probs = Tensor::full({2, 2}, 0.5);
  double loss = forward_loss(probs, {1});
  CHECK(loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK(ctc_brute_force(probs, {1}) == doctest::Approx(loss).epsilon(1e-12));
}

TEST_CASE("empty target leaves only the all-blank path") {
  Rng rng(3);
  Tensor probs = random_dist(4, 3, rng);
  double expect = 0.0;
  for (std::size_t t = 0; t < 4; ++t) expect -= std::log(probs.at(t, 0));
  CHECK(forward_loss(probs, {}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("a repeated label needs a separating blank frame") {
  Rng rng(4);
  Tensor probs2 = random_dist(2, 2, rng);
  Tape t;
  CHECK_FALSE(ctc_log_forward(t, t.constant(log_of(probs2)), {1, 1}, 0).has_value());
  CHECK(ctc_feasible(3, {1, 1}));
  CHECK_FALSE(ctc_feasible(2, {1, 1}));
}

TEST_CASE("feasibility is monotone in the frame count") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t len = rng.index(5);
    std::vector<int> z(len);
    for (auto& v : z) v = 1 + static_cast<int>(rng.index(3));
    bool prev = false;
    for (std::size_t frames = 0; frames <= 12; ++frames) {
      bool now = ctc_feasible(frames, z);
      if (prev) CHECK(now);
      prev = now;
    }
  }
}

TEST_CASE("targets longer than the frame count are impossible for the oracle") {
  Rng rng(6);
  Tensor probs = random_dist(2, 3, rng);
  CHECK(std::isinf(ctc_brute_force(probs, {1, 2, 1})));
}

TEST_CASE("single-frame loss is the frame's label probability") {
  Rng rng(7);
  Tensor probs = random_dist(1, 3, rng);
  CHECK(forward_loss(probs, {2}) == doctest::Approx(-std::log(probs.at(0, 2))).epsilon(1e-12));
  CHECK(ctc_brute_force(probs, {2}) ==
        doctest::Approx(-std::log(probs.at(0, 2))).epsilon(1e-12));
}

TEST_CASE("oracle equivalence on 200 random instances") {
  Rng rng(8);
  int feasible_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t frames = 1 + rng.index(6);   // J <= 6
    std::size_t vocab = 2 + rng.index(2);    // blank + up to 2 labels
    std::size_t len = rng.index(5);
    std::vector<int> z(len);
    for (auto& v : z) v = 1 + static_cast<int>(rng.index(vocab - 1));
    Tensor probs = random_dist(frames, vocab, rng);

    Tape t;
    auto loss = ctc_log_forward(t, t.constant(log_of(probs)), z, 0);
    double brute = ctc_brute_force(probs, z);
    if (loss.has_value()) {
      ++feasible_count;
      CHECK(std::fabs(t.value(*loss).scalar_value() - brute) < 1e-10);
    } else {
      CHECK(std::isinf(brute));
    }
  }
  CHECK(feasible_count > 50);  // the sweep must actually exercise the recursion
}

TEST_CASE("ctc head loss differentiates through the projection") {
  Rng rng(9);
  const std::size_t j_len = 5, w = 3, vocab = 4;
  Tensor h({j_len, w});
  for (double& v : h.data()) v = rng.uniform(-1.0, 1.0);
  std::vector<int> target = {1, 2, 1};
  std::vector<Tensor> params;
  Tensor proj({w, vocab});
  for (double& v : proj.data()) v = rng.uniform(-0.8, 0.8);
  params.push_back(proj);
  auto build = [h, target](Tape& t, const std::vector<NodeId>& p) {
    TokenSequence z{"phones", target};
    auto loss = ctc_loss(t, {t.constant(h), h.rows()}, CtcHead{p[0], 0}, z);
    REQUIRE(loss.has_value());
    return *loss;
  };
  CHECK(finite_difference_check(build, params, 3e-5) < 1e-5);
}

TEST_CASE("per-frame head distributions normalize") {
  Rng rng(10);
  const std::size_t j_len = 4, w = 3, vocab = 5;
  Tensor h({j_len, w});
  for (double& v : h.data()) v = rng.uniform(-1.0, 1.0);
  Tensor proj({w, vocab});
  for (double& v : proj.data()) v = rng.uniform(-1.0, 1.0);
  Tape t;
  const Tensor dist = t.value(t.softmax(t.matmul(t.constant(h), t.constant(proj)), 1));
  for (std::size_t i = 0; i < j_len; ++i) {
    double row = 0.0;
    for (std::size_t v = 0; v < vocab; ++v) row += dist.at(i, v);
    CHECK(std::fabs(row - 1.0) < 1e-12);
  }
}

TEST_CASE("ctc rejects blanks and out-of-range labels in targets") {
  Rng rng(11);
  Tensor probs = random_dist(3, 3, rng);
  Tape t;
  NodeId lp = t.constant(log_of(probs));
  CHECK_THROWS_AS(ctc_log_forward(t, lp, {0}, 0), Error);
  CHECK_THROWS_AS(ctc_log_forward(t, lp, {7}, 0), Error);
}

TEST_CASE("the oracle refuses oversized instances") {
  Tensor probs = Tensor::full({9, 2}, 0.5);
  CHECK_THROWS_AS(ctc_brute_force(probs, {1}), Error);
}
