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

#include "mtasr/encoder.h"

#include "mtasr/rng.h"

namespace mtasr {

namespace {

std::size_t hidden_size_of(const Tape& tape, const LstmParams& p) {
  return tape.value(p.wh).rows();
}

}  // namespace

LstmState lstm_cell_step(Tape& tape, NodeId x_t, const LstmState& prev, const LstmParams& params) {
  std::size_t h = hidden_size_of(tape, params);
  NodeId pre = tape.add(tape.add(tape.matmul(x_t, params.wx), tape.matmul(prev.h, params.wh)),
                        params.b);
  NodeId i_gate = tape.sigmoid(tape.slice(pre, 1, 0, h));
  NodeId f_gate = tape.sigmoid(tape.slice(pre, 1, h, 2 * h));
  NodeId g_cell = tape.tanh(tape.slice(pre, 1, 2 * h, 3 * h));
  NodeId o_gate = tape.sigmoid(tape.slice(pre, 1, 3 * h, 4 * h));
  NodeId c_t = tape.add(tape.mul(f_gate, prev.c), tape.mul(i_gate, g_cell));
  NodeId h_t = tape.mul(o_gate, tape.tanh(c_t));
  return {h_t, c_t};
}

NodeId bilstm_layer(Tape& tape, NodeId seq, const LstmParams& fwd, const LstmParams& bwd) {
  const Tensor& X = tape.value(seq);
  if (X.rank() != 2) throw ShapeError("bilstm_layer: input must be [n, in], got " + X.shape_str());
  std::size_t n = X.rows();
  std::size_t h = hidden_size_of(tape, fwd);

  std::vector<NodeId> fwd_rows(n), bwd_rows(n);
  LstmState state{tape.constant(Tensor({1, h})), tape.constant(Tensor({1, h}))};
  for (std::size_t t = 0; t < n; ++t) {
    state = lstm_cell_step(tape, tape.slice(seq, 0, t, t + 1), state, fwd);
    fwd_rows[t] = state.h;
  }
  state = {tape.constant(Tensor({1, h})), tape.constant(Tensor({1, h}))};
  for (std::size_t t = n; t-- > 0;) {
    state = lstm_cell_step(tape, tape.slice(seq, 0, t, t + 1), state, bwd);
    bwd_rows[t] = state.h;
  }
  NodeId fwd_stack = n == 1 ? fwd_rows[0] : tape.concat(0, fwd_rows);
  NodeId bwd_stack = n == 1 ? bwd_rows[0] : tape.concat(0, bwd_rows);
  return tape.concat(1, {fwd_stack, bwd_stack});
}

NodeId bilstm_layer(Tape& tape, const std::vector<NodeId>& rows, const LstmParams& fwd,
                    const LstmParams& bwd) {
  if (rows.empty()) throw Error("bilstm_layer: empty sequence");
  NodeId seq = rows.size() == 1 ? rows[0] : tape.concat(0, rows);
  return bilstm_layer(tape, seq, fwd, bwd);
}

NodeId pyramid_reduce(Tape& tape, NodeId seq) { return tape.pyramid_pack(seq); }

std::vector<std::size_t> pyramid_lengths(std::size_t frames, std::size_t layers) {
  if (frames == 0) throw Error("pyramid_lengths: empty sequence");
  std::vector<std::size_t> out(layers);
  std::size_t len = frames;
  for (std::size_t j = 0; j < layers; ++j) {
    if (j > 0) len = (len + 1) / 2;
    out[j] = len;
  }
  return out;
}

EncoderStates encode(Tape& tape, const Tensor& features, std::size_t true_len,
                     const std::vector<EncoderLayerParams>& layers, double dropout_rate,
                     std::uint64_t seed, bool train) {
  if (true_len == 0 || true_len > features.rows()) {
    throw Error("encode: true length " + std::to_string(true_len) + " invalid for features " +
                features.shape_str());
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw Error("encode: dropout rate out of range");

  std::vector<std::size_t> valid = pyramid_lengths(true_len, layers.size());
  std::vector<std::size_t> padded = pyramid_lengths(features.rows(), layers.size());

  NodeId feats = tape.constant(features);
  NodeId cur = features.rows() == true_len ? feats : tape.slice(feats, 0, 0, true_len);

  EncoderStates out;
  out.h.resize(layers.size());
  out.valid_len = valid;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    if (j > 0) cur = pyramid_reduce(tape, cur);
    cur = bilstm_layer(tape, cur, layers[j].fwd, layers[j].bwd);
    if (train && dropout_rate > 0.0) {
      cur = tape.dropout(cur, dropout_rate, mix_seed(seed, j));
    }
    NodeId exposed = cur;
    if (padded[j] > valid[j]) {
      NodeId filler = tape.constant(Tensor({padded[j] - valid[j], tape.value(cur).cols()}));
      exposed = tape.concat(0, {cur, filler});
    }
    out.h[j] = exposed;
  }
  return out;
}

}  // namespace mtasr
