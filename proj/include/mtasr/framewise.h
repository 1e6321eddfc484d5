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

#include <vector>

#include "mtasr/decoder.h"
#include "mtasr/rng.h"
#include "mtasr/tape.h"

namespace mtasr {

/// Frame-level label sequence, one entry per input frame.
struct StateAlignment {
  std::vector<int> states;
};

/// Keeps the first label of each adjacent pair (even indices); for odd input
/// the final singleton keeps its label. Output length ceil(n/2), matching the
/// factor-2 time reduction of a pyramid layer.
std::vector<int> subsample_labels(const std::vector<int>& states);

/// Applies subsample_labels layer-1 times, aligning a frame-level alignment
/// with the resolution of the given 1-based encoder layer.
std::vector<int> subsample_to_layer(const std::vector<int>& states, std::size_t layer);

/// Sum over frames of cross-entropy of softmax(h_m • projection) against
/// label m. labels must cover exactly the valid frames of h.
NodeId framewise_loss(Tape& tape, const AttendedSeq& h, const std::vector<int>& labels,
                      NodeId projection);

/// Importance-sampled approximation of framewise_loss: per frame the
/// normalizer runs over the true label plus n_samples distinct negatives
/// drawn uniformly without replacement, each negative's score corrected by
/// -log(n / (V-1)). Exact when the sample covers the full support;
/// n_samples >= V behaves as the full softmax.
NodeId sampled_softmax_loss(Tape& tape, const AttendedSeq& h, const std::vector<int>& labels,
                            NodeId projection, std::size_t n_samples, Rng& rng);

}  // namespace mtasr
