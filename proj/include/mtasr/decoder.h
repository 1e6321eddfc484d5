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
#include <utility>
#include <vector>

#include "mtasr/encoder.h"
#include "mtasr/rng.h"
#include "mtasr/tape.h"
#include "mtasr/vocab.h"

namespace mtasr {

/// Content attention: scores = v^T tanh(W1 h_i + W2 d_t + b_a).
/// w1 [w, A], w2 [Hd, A], v [A, 1], b_a [1, A].
struct AttentionParams {
  NodeId w1;
  NodeId w2;
  NodeId v;
  NodeId b_a;
};

/// Output side of a decoder: posterior = softmax(W_s [c; d] + b_s), with a
/// token embedding table for the input side. The vocabulary must reserve SOS
/// and EOS indices.
struct OutputProjection {
  NodeId w_s;        // [w + Hd, V]
  NodeId b_s;        // [1, V]
  NodeId embedding;  // [V, E]
  int sos = -1;
  int eos = -1;
};

struct DecoderParams {
  LstmParams lstm;
  AttentionParams att;
  OutputProjection out;
};

/// Encoder sequence handed to a decoder or head: a [J_padded, w] state matrix
/// plus the count of leading rows that are real frames. Padded rows receive
/// zero attention mass via a large negative score surrogate.
struct AttendedSeq {
  NodeId h;
  std::size_t valid;
};

AttendedSeq attended(const Tape& tape, const EncoderStates& enc, std::size_t layer_index);

struct DecoderState {
  NodeId d;      // [1, Hd]
  NodeId cell;   // [1, Hd]
  NodeId ctx;    // [1, w]
  NodeId alpha;  // [J, 1] attention weights of the step that produced ctx, -1 before step 1
};

/// d_0 = cell_0 = 0, c_0 = 0 (context before the first step).
DecoderState decoder_initial_state(Tape& tape, std::size_t hidden, std::size_t ctx_width);

/// Returns (alpha [J,1], context [1,w]). alpha is a softmax over real frames;
/// padded rows get exactly zero weight.
std::pair<NodeId, NodeId> attend(Tape& tape, const AttendedSeq& h, NodeId d_t,
                                 const AttentionParams& params);

struct StepResult {
  DecoderState state;
  NodeId logits;  // [1, V]
  NodeId dist;    // [1, V], softmax of logits
};

/// One decoder step: embed prev token, LSTM over [embedding ; c_{t-1}],
/// attend with the new hidden state, project [c_t ; d_t] to the vocabulary.
StepResult decoder_step(Tape& tape, int prev_token, const DecoderState& state,
                        const DecoderParams& params, const AttendedSeq& h);

/// Captured per-step attention rows, for inspection and tests.
struct DecodeTrace {
  std::vector<Tensor> alphas;
};

/// Negative log-likelihood of target plus EOS under teacher forcing; with
/// probability sampling_prob the next input token is drawn from the current
/// predicted distribution instead of the ground truth.
NodeId teacher_forced_loss(Tape& tape, const AttendedSeq& h, const TokenSequence& target,
                           double sampling_prob, Rng& rng, const DecoderParams& params,
                           DecodeTrace* trace = nullptr);

/// Beam-1 decoding: feed back the argmax token, stop at EOS or max_len.
/// Returned tokens exclude SOS/EOS.
TokenSequence greedy_decode(Tape& tape, const AttendedSeq& h, std::size_t max_len,
                            const DecoderParams& params, const std::string& vocab_name,
                            DecodeTrace* trace = nullptr);

}  // namespace mtasr
