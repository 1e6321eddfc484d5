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

#include "mtasr/model.h"

#include <algorithm>

#include "mtasr/rng.h"

namespace mtasr {

std::string task_type_name(TaskType type) {
  switch (type) {
    case TaskType::kCharDecoder: return "char-decoder";
    case TaskType::kPhoneDecoder: return "phone-decoder";
    case TaskType::kPhoneCtc: return "phone-ctc";
    case TaskType::kStateFrames: return "state-frames";
  }
  throw Error("unknown task type");
}

TaskType task_type_from_name(const std::string& name) {
  if (name == "char-decoder") return TaskType::kCharDecoder;
  if (name == "phone-decoder") return TaskType::kPhoneDecoder;
  if (name == "phone-ctc") return TaskType::kPhoneCtc;
  if (name == "state-frames") return TaskType::kStateFrames;
  throw ConfigError("unknown task type '" + name + "'");
}

std::string model_display_name(const ModelConfig& cfg) {
  std::string name = "Enc-Dec";
  for (const TaskSpec& t : cfg.aux_tasks) {
    switch (t.type) {
      case TaskType::kPhoneDecoder: name += "+PhoneDec-" + std::to_string(t.layer); break;
      case TaskType::kPhoneCtc: name += "+PhoneCTC-" + std::to_string(t.layer); break;
      case TaskType::kStateFrames: name += "+State-" + std::to_string(t.layer); break;
      case TaskType::kCharDecoder: break;
    }
  }
  return name;
}

void ParamStore::add(const std::string& name, Tensor value) {
  if (has(name)) throw Error("duplicate parameter name " + name);
  index_.emplace(name, names_.size());
  names_.push_back(name);
  values_.push_back(std::move(value));
}

Tensor& ParamStore::at(const std::string& name) { return values_[index_of(name)]; }

const Tensor& ParamStore::at(const std::string& name) const {
  return const_cast<ParamStore*>(this)->at(name);
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter " + name);
  return it->second;
}

namespace {

Tensor uniform_init(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-0.05, 0.05);
  return t;
}

// Bias layout i, f, g, o; forget gate block starts at hidden.
Tensor lstm_bias(std::size_t hidden) {
  Tensor b({1, 4 * hidden});
  for (std::size_t j = hidden; j < 2 * hidden; ++j) b.at(0, j) = 1.0;
  return b;
}

void add_lstm(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
              Rng& rng) {
  store.add(prefix + ".wx", uniform_init({in, 4 * hidden}, rng));
  store.add(prefix + ".wh", uniform_init({hidden, 4 * hidden}, rng));
  store.add(prefix + ".b", lstm_bias(hidden));
}

void add_decoder(ParamStore& store, const std::string& prefix, std::size_t vocab,
                 std::size_t ctx_width, const ModelConfig& cfg, Rng& rng) {
  store.add(prefix + ".embed", uniform_init({vocab, cfg.embed}, rng));
  add_lstm(store, prefix + ".lstm", cfg.embed + ctx_width, cfg.hidden, rng);
  store.add(prefix + ".att.w1", uniform_init({ctx_width, cfg.attn}, rng));
  store.add(prefix + ".att.w2", uniform_init({cfg.hidden, cfg.attn}, rng));
  store.add(prefix + ".att.v", uniform_init({cfg.attn, 1}, rng));
  store.add(prefix + ".att.ba", Tensor({1, cfg.attn}));
  store.add(prefix + ".out.w", uniform_init({ctx_width + cfg.hidden, vocab}, rng));
  store.add(prefix + ".out.b", Tensor({1, vocab}));
}

std::string aux_prefix(const TaskSpec& task) {
  switch (task.type) {
    case TaskType::kPhoneDecoder: return "dec.phone.l" + std::to_string(task.layer);
    case TaskType::kPhoneCtc: return "ctc.l" + std::to_string(task.layer);
    case TaskType::kStateFrames: return "state.l" + std::to_string(task.layer);
    case TaskType::kCharDecoder: break;
  }
  throw Error("aux_prefix: not an auxiliary task");
}

}  // namespace

ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.feat_dim == 0 || cfg.char_vocab == 0 || cfg.enc_layers == 0) {
    throw Error("init_params: incomplete model configuration");
  }
  Rng rng(mix_seed(seed, 0x1417));
  ParamStore store;
  const std::size_t width = 2 * cfg.hidden;
  for (std::size_t j = 1; j <= cfg.enc_layers; ++j) {
    std::size_t in = j == 1 ? cfg.feat_dim : 2 * width;
    add_lstm(store, "enc.l" + std::to_string(j) + ".fwd", in, cfg.hidden, rng);
    add_lstm(store, "enc.l" + std::to_string(j) + ".bwd", in, cfg.hidden, rng);
  }
  add_decoder(store, "dec.char", cfg.char_vocab, width, cfg, rng);
  for (const TaskSpec& task : cfg.aux_tasks) {
    switch (task.type) {
      case TaskType::kPhoneDecoder:
        add_decoder(store, aux_prefix(task), cfg.phone_vocab, width, cfg, rng);
        break;
      case TaskType::kPhoneCtc:
        store.add(aux_prefix(task) + ".proj", uniform_init({width, cfg.phone_vocab}, rng));
        break;
      case TaskType::kStateFrames:
        store.add(aux_prefix(task) + ".proj", uniform_init({width, cfg.state_vocab}, rng));
        break;
      case TaskType::kCharDecoder:
        throw Error("init_params: character decoder is implicit, not an aux task");
    }
  }
  return store;
}

NodeId Binding::id(const std::string& name) const { return ids[store->index_of(name)]; }

Binding bind_params(Tape& tape, const ParamStore& store) {
  Binding bind;
  bind.tape = &tape;
  bind.store = &store;
  bind.ids.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    bind.ids.push_back(tape.parameter(store.at_index(i)));
  }
  return bind;
}

EncoderStates model_encode(Tape& tape, const Binding& bind, const ModelConfig& cfg,
                           const Tensor& features, std::size_t true_len, bool train,
                           std::uint64_t seed) {
  std::vector<EncoderLayerParams> layers(cfg.enc_layers);
  for (std::size_t j = 1; j <= cfg.enc_layers; ++j) {
    std::string p = "enc.l" + std::to_string(j);
    layers[j - 1].fwd = {bind.id(p + ".fwd.wx"), bind.id(p + ".fwd.wh"), bind.id(p + ".fwd.b")};
    layers[j - 1].bwd = {bind.id(p + ".bwd.wx"), bind.id(p + ".bwd.wh"), bind.id(p + ".bwd.b")};
  }
  return encode(tape, features, true_len, layers, cfg.dropout, seed, train);
}

DecoderParams decoder_params(const Binding& bind, const std::string& prefix, int sos, int eos) {
  DecoderParams p;
  p.lstm = {bind.id(prefix + ".lstm.wx"), bind.id(prefix + ".lstm.wh"), bind.id(prefix + ".lstm.b")};
  p.att = {bind.id(prefix + ".att.w1"), bind.id(prefix + ".att.w2"), bind.id(prefix + ".att.v"),
           bind.id(prefix + ".att.ba")};
  p.out = {bind.id(prefix + ".out.w"), bind.id(prefix + ".out.b"), bind.id(prefix + ".embed"),
           sos, eos};
  return p;
}

const TaskLoss* LossBundle::find(const std::string& name) const {
  for (const TaskLoss& t : entries) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

NodeId combine_losses(Tape& tape, LossBundle& bundle) {
  std::vector<const TaskLoss*> active;
  for (const TaskLoss& t : bundle.entries) {
    if (t.active) active.push_back(&t);
  }
  if (active.empty()) throw Error("combine_losses: no active loss");
  std::sort(active.begin(), active.end(),
            [](const TaskLoss* a, const TaskLoss* b) { return a->name < b->name; });
  NodeId acc = active[0]->loss;
  for (std::size_t i = 1; i < active.size(); ++i) acc = tape.add(acc, active[i]->loss);
  bundle.combined = tape.scale(acc, 1.0 / static_cast<double>(active.size()));
  bundle.combined_value = tape.value(bundle.combined).scalar_value();
  return bundle.combined;
}

LossBundle utterance_losses(Tape& tape, const Binding& bind, const Model& model,
                            const Tensor& features, std::size_t true_len,
                            const TokenSequence& chars, const TokenSequence& phones,
                            const std::optional<StateAlignment>& states, bool train,
                            std::uint64_t seed, DecodeTrace* char_trace) {
  const ModelConfig& cfg = model.cfg;
  EncoderStates enc = model_encode(tape, bind, cfg, features, true_len, train, mix_seed(seed, 1));

  LossBundle bundle;
  {
    Rng rng(mix_seed(seed, 2));
    DecoderParams dec =
        decoder_params(bind, "dec.char", model.chars.require_sos(), model.chars.require_eos());
    double sp = train ? cfg.sampling_prob : 0.0;
    NodeId loss = teacher_forced_loss(tape, attended(tape, enc, cfg.enc_layers - 1), chars, sp,
                                      rng, dec, char_trace);
    bundle.entries.push_back({"char", loss, true, tape.value(loss).scalar_value()});
  }

  for (const TaskSpec& task : cfg.aux_tasks) {
    const std::size_t li = static_cast<std::size_t>(task.layer) - 1;
    switch (task.type) {
      case TaskType::kPhoneDecoder: {
        Rng rng(mix_seed(seed, 3, static_cast<std::uint64_t>(task.layer)));
        DecoderParams dec = decoder_params(bind, aux_prefix(task), model.phones.require_sos(),
                                           model.phones.require_eos());
        // ground truth only; no scheduled sampling for the phone decoder
        NodeId loss = teacher_forced_loss(tape, attended(tape, enc, li), phones, 0.0, rng, dec);
        bundle.entries.push_back(
            {"phone-dec-" + std::to_string(task.layer), loss, true,
             tape.value(loss).scalar_value()});
        break;
      }
      case TaskType::kPhoneCtc: {
        CtcHead head{bind.id(aux_prefix(task) + ".proj"), model.phones.require_blank()};
        std::optional<NodeId> loss = ctc_loss(tape, attended(tape, enc, li), head, phones);
        TaskLoss entry;
        entry.name = "phone-ctc-" + std::to_string(task.layer);
        if (loss) {
          entry.loss = *loss;
          entry.active = true;
          entry.value = tape.value(*loss).scalar_value();
        }
        bundle.entries.push_back(std::move(entry));
        break;
      }
      case TaskType::kStateFrames: {
        if (!states) throw Error("state-frames task needs a state alignment for every utterance");
        std::vector<int> labels =
            subsample_to_layer(states->states, static_cast<std::size_t>(task.layer));
        NodeId proj = bind.id(aux_prefix(task) + ".proj");
        NodeId loss;
        if (train && task.sampled_softmax > 0) {
          Rng rng(mix_seed(seed, 4, static_cast<std::uint64_t>(task.layer)));
          loss = sampled_softmax_loss(tape, attended(tape, enc, li), labels, proj,
                                      task.sampled_softmax, rng);
        } else {
          loss = framewise_loss(tape, attended(tape, enc, li), labels, proj);
        }
        bundle.entries.push_back({"state-" + std::to_string(task.layer), loss, true,
                                  tape.value(loss).scalar_value()});
        break;
      }
      case TaskType::kCharDecoder:
        throw Error("utterance_losses: character decoder is implicit, not an aux task");
    }
  }

  combine_losses(tape, bundle);
  return bundle;
}

TokenSequence transcribe(const Model& model, const Tensor& features, std::size_t true_len) {
  Tape tape;
  Binding bind = bind_params(tape, model.params);
  EncoderStates enc = model_encode(tape, bind, model.cfg, features, true_len, false, 0);
  AttendedSeq top = attended(tape, enc, model.cfg.enc_layers - 1);
  DecoderParams dec =
      decoder_params(bind, "dec.char", model.chars.require_sos(), model.chars.require_eos());
  return greedy_decode(tape, top, 2 * top.valid + 10, dec, model.chars.name);
}

ModelConfig infer_config(const ParamStore& store) {
  ModelConfig cfg;
  cfg.feat_dim = store.at("enc.l1.fwd.wx").rows();
  cfg.hidden = store.at("enc.l1.fwd.wh").rows();
  cfg.enc_layers = 0;
  while (store.has("enc.l" + std::to_string(cfg.enc_layers + 1) + ".fwd.wx")) ++cfg.enc_layers;
  cfg.char_vocab = store.at("dec.char.embed").rows();
  cfg.embed = store.at("dec.char.embed").cols();
  cfg.attn = store.at("dec.char.att.w1").cols();
  for (int layer = 1; layer <= static_cast<int>(cfg.enc_layers); ++layer) {
    std::string l = std::to_string(layer);
    if (store.has("dec.phone.l" + l + ".embed")) {
      cfg.aux_tasks.push_back({TaskType::kPhoneDecoder, layer, 0});
      cfg.phone_vocab = store.at("dec.phone.l" + l + ".embed").rows();
    }
    if (store.has("ctc.l" + l + ".proj")) {
      cfg.aux_tasks.push_back({TaskType::kPhoneCtc, layer, 0});
      cfg.phone_vocab = store.at("ctc.l" + l + ".proj").cols();
    }
    if (store.has("state.l" + l + ".proj")) {
      cfg.aux_tasks.push_back({TaskType::kStateFrames, layer, 0});
      cfg.state_vocab = store.at("state.l" + l + ".proj").cols();
    }
  }
  return cfg;
}

}  // namespace mtasr
