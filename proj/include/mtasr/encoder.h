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

#include <cstdint>
#include <vector>

#include "mtasr/tape.h"

namespace mtasr {

/// One direction of an LSTM layer. Gate blocks are packed along the second
/// axis in i, f, g, o order: wx [in, 4H], wh [H, 4H], b [1, 4H].
struct LstmParams {
  NodeId wx;
  NodeId wh;
  NodeId b;
};

struct LstmState {
  NodeId h;
  NodeId c;
};

struct EncoderLayerParams {
  LstmParams fwd;
  LstmParams bwd;
};

/// Per-layer hidden state sequences. h[j] is a [len_j, 2H] matrix (forward
/// and backward halves concatenated); when the input was padded, rows at and
/// beyond valid_len[j] are zero filler that downstream consumers must mask.
struct EncoderStates {
  std::vector<NodeId> h;
  std::vector<std::size_t> valid_len;
};

/// i,f,o = sigmoid(affine), g = tanh(affine), c = f*c_prev + i*g,
/// h = o*tanh(c).
LstmState lstm_cell_step(Tape& tape, NodeId x_t, const LstmState& prev, const LstmParams& params);

/// Bidirectional scan over the rows of seq [n, in]; both directions start
/// from zero states. Output row i is [fwd_i ; bwd_i], shape [n, 2H].
NodeId bilstm_layer(Tape& tape, NodeId seq, const LstmParams& fwd, const LstmParams& bwd);

/// Convenience overload over a list of [1, in] rows.
NodeId bilstm_layer(Tape& tape, const std::vector<NodeId>& rows, const LstmParams& fwd,
                    const LstmParams& bwd);

/// [n, w] -> [ceil(n/2), 2w]; odd tail row duplicated.
NodeId pyramid_reduce(Tape& tape, NodeId seq);

/// Iterated ceil(T/2) starting at full resolution: layer 1 keeps T, each
/// later layer halves.
std::vector<std::size_t> pyramid_lengths(std::size_t frames, std::size_t layers);

/// Runs the full pyramid. `features` may carry zero-padded tail rows beyond
/// true_len; recurrences only ever see the first true_len frames, and layer
/// outputs are re-padded with zero rows to the lengths implied by the padded
/// input so that a batch stays rectangular. Dropout (train only) is applied
/// to each layer's output before it feeds the next layer or any consumer.
EncoderStates encode(Tape& tape, const Tensor& features, std::size_t true_len,
                     const std::vector<EncoderLayerParams>& layers, double dropout_rate,
                     std::uint64_t seed, bool train);

}  // namespace mtasr
