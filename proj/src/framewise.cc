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

#include "mtasr/framewise.h"

#include <cmath>

namespace mtasr {

std::vector<int> subsample_labels(const std::vector<int>& states) {
  std::vector<int> out;
  out.reserve((states.size() + 1) / 2);
  for (std::size_t i = 0; i < states.size(); i += 2) out.push_back(states[i]);
  return out;
}

std::vector<int> subsample_to_layer(const std::vector<int>& states, std::size_t layer) {
  if (layer < 1) throw Error("subsample_to_layer: layers are 1-based");
  std::vector<int> out = states;
  for (std::size_t j = 1; j < layer; ++j) out = subsample_labels(out);
  return out;
}

namespace {

NodeId valid_frames(Tape& tape, const AttendedSeq& h, std::size_t label_count,
                    const char* op_name) {
  const Tensor& H = tape.value(h.h);
  if (h.valid == 0 || h.valid > H.rows()) throw Error(std::string(op_name) + ": bad valid length");
  if (label_count != h.valid) {
    throw Error(std::string(op_name) + ": " + std::to_string(label_count) + " labels vs " +
                std::to_string(h.valid) + " frames");
  }
  return h.valid == H.rows() ? h.h : tape.slice(h.h, 0, 0, h.valid);
}

void check_labels(const std::vector<int>& labels, std::size_t vocab, const char* op_name) {
  for (int s : labels) {
    if (s < 0 || static_cast<std::size_t>(s) >= vocab) {
      throw Error(std::string(op_name) + ": label " + std::to_string(s) + " out of range for " +
                  std::to_string(vocab) + " states");
    }
  }
}

}  // namespace

NodeId framewise_loss(Tape& tape, const AttendedSeq& h, const std::vector<int>& labels,
                      NodeId projection) {
  NodeId frames = valid_frames(tape, h, labels.size(), "framewise_loss");
  check_labels(labels, tape.value(projection).cols(), "framewise_loss");
  NodeId logp = tape.log_softmax(tape.matmul(frames, projection), 1);
  return tape.scale(tape.sum(tape.pick(logp, labels)), -1.0);
}

NodeId sampled_softmax_loss(Tape& tape, const AttendedSeq& h, const std::vector<int>& labels,
                            NodeId projection, std::size_t n_samples, Rng& rng) {
  const std::size_t vocab = tape.value(projection).cols();
  if (vocab < 2) throw Error("sampled_softmax_loss: need at least two states");
  NodeId frames = valid_frames(tape, h, labels.size(), "sampled_softmax_loss");
  check_labels(labels, vocab, "sampled_softmax_loss");

  const std::size_t n = std::min(n_samples, vocab - 1);
  if (n == 0) throw Error("sampled_softmax_loss: n_samples must be positive");
  const std::size_t k = n + 1;
  const double correction = std::log(static_cast<double>(vocab - 1) / static_cast<double>(n));

  NodeId scores = tape.matmul(frames, projection);
  std::vector<int> gather_ids(labels.size() * k);
  Tensor corr({labels.size(), k});
  for (std::size_t m = 0; m < labels.size(); ++m) {
    gather_ids[m * k] = labels[m];
    std::vector<int> negatives =
        rng.sample_without_replacement(static_cast<int>(vocab), labels[m], n);
    for (std::size_t j = 0; j < n; ++j) {
      gather_ids[m * k + 1 + j] = negatives[j];
      corr.at(m, 1 + j) = correction;
    }
  }
  NodeId candidate_scores =
      tape.add(tape.gather_cols(scores, std::move(gather_ids), k), tape.constant(std::move(corr)));
  NodeId logp = tape.log_softmax(candidate_scores, 1);
  // true label sits in column 0 of every row
  return tape.scale(tape.sum(tape.pick(logp, std::vector<int>(labels.size(), 0))), -1.0);
}

}  // namespace mtasr
