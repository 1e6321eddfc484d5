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

#include "mtasr/decoder.h"

#include <algorithm>

namespace mtasr {

namespace {

constexpr double kMaskScore = -1e30;

int argmax_row(const Tensor& t) {
  int best = 0;
  for (std::size_t j = 1; j < t.cols(); ++j) {
    if (t.at(0, j) > t.at(0, best)) best = static_cast<int>(j);
  }
  return best;
}

}  // namespace

AttendedSeq attended(const Tape& tape, const EncoderStates& enc, std::size_t layer_index) {
  (void)tape;
  if (layer_index >= enc.h.size()) throw Error("attended: encoder layer index out of range");
  return {enc.h[layer_index], enc.valid_len[layer_index]};
}

DecoderState decoder_initial_state(Tape& tape, std::size_t hidden, std::size_t ctx_width) {
  return {tape.constant(Tensor({1, hidden})), tape.constant(Tensor({1, hidden})),
          tape.constant(Tensor({1, ctx_width})), -1};
}

std::pair<NodeId, NodeId> attend(Tape& tape, const AttendedSeq& h, NodeId d_t,
                                 const AttentionParams& params) {
  const Tensor& H = tape.value(h.h);
  if (H.rank() != 2 || H.rows() == 0) throw Error("attend: empty encoder sequence");
  if (h.valid == 0 || h.valid > H.rows()) throw Error("attend: bad valid length");

  // scores u = tanh(H W1 + (d W2 + b_a) broadcast) v, shape [J, 1]
  NodeId keys = tape.matmul(h.h, params.w1);
  NodeId query = tape.add(tape.matmul(d_t, params.w2), params.b_a);
  NodeId scores = tape.matmul(tape.tanh(tape.add(keys, query)), params.v);

  if (h.valid < H.rows()) {
    Tensor mask({H.rows(), 1});
    for (std::size_t i = h.valid; i < H.rows(); ++i) mask.at(i, 0) = kMaskScore;
    scores = tape.add(scores, tape.constant(std::move(mask)));
  }
  NodeId alpha = tape.softmax(scores, 0);
  NodeId ctx = tape.matmul(tape.transpose(alpha), h.h);
  return {alpha, ctx};
}

StepResult decoder_step(Tape& tape, int prev_token, const DecoderState& state,
                        const DecoderParams& params, const AttendedSeq& h) {
  NodeId emb = tape.embedding(params.out.embedding, {prev_token});
  NodeId x = tape.concat(1, {emb, state.ctx});
  LstmState next = lstm_cell_step(tape, x, {state.d, state.cell}, params.lstm);
  auto [alpha, ctx] = attend(tape, h, next.h, params.att);
  NodeId logits = tape.add(tape.matmul(tape.concat(1, {ctx, next.h}), params.out.w_s),
                           params.out.b_s);
  NodeId dist = tape.softmax(logits, 1);
  return {DecoderState{next.h, next.c, ctx, alpha}, logits, dist};
}

NodeId teacher_forced_loss(Tape& tape, const AttendedSeq& h, const TokenSequence& target,
                           double sampling_prob, Rng& rng, const DecoderParams& params,
                           DecodeTrace* trace) {
  if (target.tokens.empty()) throw Error("teacher_forced_loss: empty target");
  if (sampling_prob < 0.0 || sampling_prob > 1.0) {
    throw Error("teacher_forced_loss: sampling probability out of range");
  }
  const std::size_t k = target.tokens.size();
  const std::size_t ctx_width = tape.value(h.h).cols();
  const std::size_t hidden = tape.value(params.lstm.wh).rows();

  DecoderState state = decoder_initial_state(tape, hidden, ctx_width);
  int input_token = params.out.sos;
  std::vector<NodeId> step_logps;
  step_logps.reserve(k + 1);
  for (std::size_t t = 0; t <= k; ++t) {
    StepResult step = decoder_step(tape, input_token, state, params, h);
    state = step.state;
    if (trace) trace->alphas.push_back(tape.value(state.alpha));
    int target_token = t < k ? target.tokens[t] : params.out.eos;
    NodeId logp = tape.log_softmax(step.logits, 1);
    step_logps.push_back(tape.pick(logp, {target_token}));
    if (t < k) {
      input_token = target.tokens[t];
      if (sampling_prob > 0.0 && rng.uniform() < sampling_prob) {
        input_token = static_cast<int>(rng.categorical(tape.value(step.dist).data()));
      }
    }
  }
  NodeId stacked = step_logps.size() == 1 ? step_logps[0] : tape.concat(0, step_logps);
  return tape.scale(tape.sum(stacked), -1.0);
}

TokenSequence greedy_decode(Tape& tape, const AttendedSeq& h, std::size_t max_len,
                            const DecoderParams& params, const std::string& vocab_name,
                            DecodeTrace* trace) {
  if (max_len < 1) throw Error("greedy_decode: max_len must be >= 1");
  const std::size_t ctx_width = tape.value(h.h).cols();
  const std::size_t hidden = tape.value(params.lstm.wh).rows();

  TokenSequence out;
  out.vocab = vocab_name;
  DecoderState state = decoder_initial_state(tape, hidden, ctx_width);
  int input_token = params.out.sos;
  for (std::size_t t = 0; t < max_len; ++t) {
    StepResult step = decoder_step(tape, input_token, state, params, h);
    state = step.state;
    if (trace) trace->alphas.push_back(tape.value(state.alpha));
    int best = argmax_row(tape.value(step.logits));
    if (best == params.out.eos) break;
    out.tokens.push_back(best);
    input_token = best;
  }
  return out;
}

}  // namespace mtasr
