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

#pragma once

#include <optional>
#include <vector>

#include "mtasr/decoder.h"
#include "mtasr/tape.h"
#include "mtasr/vocab.h"

namespace mtasr {

/// Softmax output layer attached to an encoder layer; column blank_index of
/// the projection scores the blank symbol. Targets never contain blank.
struct CtcHead {
  NodeId projection;  // [w, V] with V including the blank column
  int blank_index = 0;
};

/// Merges adjacent duplicates, then removes blanks.
std::vector<int> ctc_collapse(const std::vector<int>& path, int blank_index = 0);

/// A target is reachable in frames frames iff frames >= |z| + number of
/// adjacent repeated labels (each repeat needs a separating blank).
bool ctc_feasible(std::size_t frames, const std::vector<int>& target);

/// Log-space forward algorithm over the blank-interleaved label sequence.
/// logp is a [J, V] matrix of per-frame log-probabilities already on the
/// tape. Returns the loss node, or nullopt when the target is infeasible for
/// J frames (callers skip this loss term for the utterance).
std::optional<NodeId> ctc_log_forward(Tape& tape, NodeId logp, const std::vector<int>& target,
                                      int blank_index = 0);

/// Head variant: per-frame distributions are softmax(h_k • projection) over
/// the valid frames of h_k.
std::optional<NodeId> ctc_loss(Tape& tape, const AttendedSeq& h_k, const CtcHead& head,
                               const TokenSequence& target);

/// Enumeration oracle: sums the probability of every length-J path that
/// collapses to the target. probs is a [J, V] matrix of per-frame
/// probabilities. Only meant for tiny instances (J <= 8, V <= 4); returns
/// +infinity when no path matches.
double ctc_brute_force(const Tensor& probs, const std::vector<int>& target, int blank_index = 0);

}  // namespace mtasr
