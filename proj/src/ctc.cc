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

#include "mtasr/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace mtasr {

std::vector<int> ctc_collapse(const std::vector<int>& path, int blank_index) {
  std::vector<int> out;
  int prev = -1;
  for (int p : path) {
    if (p != prev && p != blank_index) out.push_back(p);
    prev = p;
  }
  return out;
}

bool ctc_feasible(std::size_t frames, const std::vector<int>& target) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  return frames >= target.size() + repeats;
}

std::optional<NodeId> ctc_log_forward(Tape& tape, NodeId logp, const std::vector<int>& target,
                                      int blank_index) {
  const Tensor& LP = tape.value(logp);
  if (LP.rank() != 2) throw ShapeError("ctc: log-prob matrix must be [J, V]");
  const std::size_t J = LP.rows();
  const std::size_t V = LP.cols();
  for (int z : target) {
    if (z == blank_index) throw Error("ctc: target contains the blank symbol");
    if (z < 0 || static_cast<std::size_t>(z) >= V) {
      throw Error("ctc: target label " + std::to_string(z) + " out of range");
    }
  }
  if (!ctc_feasible(J, target)) return std::nullopt;

  // Blank-interleaved label sequence, length 2|z|+1.
  const std::size_t U = 2 * target.size() + 1;
  std::vector<int> lab(U, blank_index);
  for (std::size_t i = 0; i < target.size(); ++i) lab[2 * i + 1] = target[i];

  // One node per (frame, label) actually referenced; blanks repeat often.
  std::vector<std::unordered_map<int, NodeId>> frame_logp(J);
  auto logp_at = [&](std::size_t t, int label) {
    auto it = frame_logp[t].find(label);
    if (it != frame_logp[t].end()) return it->second;
    NodeId row = tape.slice(logp, 0, t, t + 1);
    NodeId cell = tape.pick(row, {label});
    frame_logp[t].emplace(label, cell);
    return cell;
  };

  // present(t,u): the usual band where a cell is both reachable from the
  // start and can still complete the label sequence.
  auto lo_u = [&](std::size_t t) -> std::size_t {
    long lo = static_cast<long>(U) - 2 * static_cast<long>(J - t);
    return lo < 0 ? 0 : static_cast<std::size_t>(lo);
  };
  auto hi_u = [&](std::size_t t) -> std::size_t { return std::min(U, 2 * (t + 1)); };

  std::vector<std::vector<NodeId>> alpha(J, std::vector<NodeId>(U, -1));
  for (std::size_t u = lo_u(0); u < hi_u(0); ++u) {
    alpha[0][u] = logp_at(0, lab[u]);
  }
  for (std::size_t t = 1; t < J; ++t) {
    for (std::size_t u = lo_u(t); u < hi_u(t); ++u) {
      std::vector<NodeId> prev;
      if (alpha[t - 1][u] >= 0) prev.push_back(alpha[t - 1][u]);
      if (u >= 1 && alpha[t - 1][u - 1] >= 0) prev.push_back(alpha[t - 1][u - 1]);
      if (u >= 2 && lab[u] != blank_index && lab[u] != lab[u - 2] && alpha[t - 1][u - 2] >= 0) {
        prev.push_back(alpha[t - 1][u - 2]);
      }
      if (prev.empty()) continue;
      NodeId acc = prev[0];
      for (std::size_t i = 1; i < prev.size(); ++i) acc = tape.logaddexp(acc, prev[i]);
      alpha[t][u] = tape.add(acc, logp_at(t, lab[u]));
    }
  }

  NodeId tail = alpha[J - 1][U - 1];
  if (U >= 2 && alpha[J - 1][U - 2] >= 0) {
    tail = tail >= 0 ? tape.logaddexp(tail, alpha[J - 1][U - 2]) : alpha[J - 1][U - 2];
  }
  if (tail < 0) throw Error("ctc: internal recursion produced no terminal cell");
  return tape.scale(tail, -1.0);
}

std::optional<NodeId> ctc_loss(Tape& tape, const AttendedSeq& h_k, const CtcHead& head,
                               const TokenSequence& target) {
  const Tensor& H = tape.value(h_k.h);
  if (h_k.valid == 0 || h_k.valid > H.rows()) throw Error("ctc_loss: bad valid length");
  NodeId frames = h_k.valid == H.rows() ? h_k.h : tape.slice(h_k.h, 0, 0, h_k.valid);
  NodeId logp = tape.log_softmax(tape.matmul(frames, head.projection), 1);
  return ctc_log_forward(tape, logp, target.tokens, head.blank_index);
}

double ctc_brute_force(const Tensor& probs, const std::vector<int>& target, int blank_index) {
  if (probs.rank() != 2) throw ShapeError("ctc_brute_force: probs must be [J, V]");
  const std::size_t J = probs.rows();
  const std::size_t V = probs.cols();
  if (J > 8 || V > 4) throw Error("ctc_brute_force: instance too large (J <= 8, V <= 4)");

  std::vector<int> path(J, 0);
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (std::size_t t = 0; t < J; ++t) p *= probs.at(t, static_cast<std::size_t>(path[t]));
    if (ctc_collapse(path, blank_index) == target) total += p;

    std::size_t pos = 0;
    while (pos < J && path[pos] == static_cast<int>(V) - 1) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == J) break;
    ++path[pos];
  }
  if (total <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(total);
}

}  // namespace mtasr
