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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtasr/ctc.h"
#include "mtasr/data.h"
#include "mtasr/decoder.h"
#include "mtasr/encoder.h"
#include "mtasr/framewise.h"
#include "mtasr/vocab.h"

namespace mtasr {

enum class TaskType { kCharDecoder, kPhoneDecoder, kPhoneCtc, kStateFrames };

std::string task_type_name(TaskType type);
TaskType task_type_from_name(const std::string& name);

struct TaskSpec {
  TaskType type;
  int layer = 0;                   // 1-based encoder layer
  std::size_t sampled_softmax = 0; // 0 = exact softmax (state task only)
};

struct ModelConfig {
  std::size_t feat_dim = 0;
  std::size_t hidden = 256;  // per direction, also decoder width
  std::size_t embed = 256;
  std::size_t attn = 256;
  std::size_t enc_layers = 4;
  std::size_t char_vocab = 0;
  std::size_t phone_vocab = 0;
  std::size_t state_vocab = 0;
  std::vector<TaskSpec> aux_tasks;  // character decoder at the top layer is implicit
  double dropout = 0.1;
  double sampling_prob = 0.1;
};

/// Output naming convention: Enc-Dec, Enc-Dec+PhoneDec-3+State-2, ...
std::string model_display_name(const ModelConfig& cfg);

/// Ordered named tensors. The order is the canonical checkpoint and gradient
/// reduction order.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Tensor& at_index(std::size_t i) { return values_[i]; }
  const Tensor& at_index(std::size_t i) const { return values_[i]; }
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Weights uniform on [-0.05, 0.05]; biases zero except LSTM forget gates
/// at 1.0.
ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Complete trained artifact: architecture, weights, and the vocabularies the
/// indices refer to.
struct Model {
  ModelConfig cfg;
  ParamStore params;
  Vocabulary chars;
  Vocabulary phones;
  Vocabulary states;
};

/// Registers every store tensor on a tape (store order) and resolves names to
/// node ids.
struct Binding {
  Tape* tape = nullptr;
  const ParamStore* store = nullptr;
  std::vector<NodeId> ids;

  NodeId id(const std::string& name) const;
};

Binding bind_params(Tape& tape, const ParamStore& store);

EncoderStates model_encode(Tape& tape, const Binding& bind, const ModelConfig& cfg,
                           const Tensor& features, std::size_t true_len, bool train,
                           std::uint64_t seed);

DecoderParams decoder_params(const Binding& bind, const std::string& prefix, int sos, int eos);

struct TaskLoss {
  std::string name;
  NodeId loss = -1;   // -1 when inactive
  bool active = false;
  double value = 0.0;
};

/// Per-utterance named losses plus their mean over active entries.
struct LossBundle {
  std::vector<TaskLoss> entries;
  NodeId combined = -1;
  double combined_value = 0.0;

  const TaskLoss* find(const std::string& name) const;
};

/// Arithmetic mean over active entries, summed in name order so the result is
/// invariant to entry ordering. Requires at least one active entry.
NodeId combine_losses(Tape& tape, LossBundle& bundle);

/// Builds every configured training loss for one utterance. An infeasible
/// CTC target deactivates only that entry. sampling_prob applies to the
/// character decoder only; the phone decoder always teacher-forces.
LossBundle utterance_losses(Tape& tape, const Binding& bind, const Model& model,
                            const Tensor& features, std::size_t true_len,
                            const TokenSequence& chars, const TokenSequence& phones,
                            const std::optional<StateAlignment>& states, bool train,
                            std::uint64_t seed, DecodeTrace* char_trace = nullptr);

/// Greedy character transcription of one utterance (max_len = 2 J + 10).
TokenSequence transcribe(const Model& model, const Tensor& features, std::size_t true_len);

/// Recovers the architecture from checkpoint tensor names and shapes.
ModelConfig infer_config(const ParamStore& store);

}  // namespace mtasr
