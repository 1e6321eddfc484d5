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

#include "mtasr/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "mtasr/checkpoint.h"
#include "mtasr/rng.h"

namespace mtasr {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return std::max(1u, std::min(hw, 8u));
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.data_root = j.at("data").get<std::string>();
  cfg.out_dir = j.at("out").get<std::string>();
  cfg.seed = j.value("seed", cfg.seed);

  if (j.contains("model")) {
    const auto& m = j.at("model");
    cfg.hidden = m.value("hidden", cfg.hidden);
    cfg.embed = m.value("embed", cfg.embed);
    cfg.attn = m.value("attention", cfg.attn);
    cfg.enc_layers = m.value("encoder_layers", cfg.enc_layers);
    cfg.dropout = m.value("dropout", cfg.dropout);
    cfg.sampling_prob = m.value("sampling_prob", cfg.sampling_prob);
  }
  if (j.contains("tasks")) {
    for (const auto& t : j.at("tasks")) {
      TaskSpec spec;
      spec.type = task_type_from_name(t.at("type").get<std::string>());
      spec.layer = t.at("layer").get<int>();
      spec.sampled_softmax = t.value("sampled_softmax", 0u);
      cfg.aux_tasks.push_back(spec);
    }
  }
  if (j.contains("training")) {
    const auto& t = j.at("training");
    cfg.batch_size = t.value("batch_size", cfg.batch_size);
    cfg.total_updates = t.value("total_updates", cfg.total_updates);
    cfg.eval_interval = t.value("eval_interval", cfg.eval_interval);
    cfg.lr = t.value("lr", cfg.lr);
    cfg.lr_decay = t.value("lr_decay", cfg.lr_decay);
    cfg.literal_decay = t.value("literal_decay", cfg.literal_decay);
    cfg.clip_norm = t.value("clip_norm", cfg.clip_norm);
    cfg.duplicate_cap = t.value("duplicate_cap", cfg.duplicate_cap);
    cfg.threads = t.value("threads", cfg.threads);
  }
  validate_config(cfg);
  return cfg;
}

TrainConfig train_config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return train_config_from_json(j);
}

nlohmann::ordered_json resolved_config_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["data"] = cfg.data_root;
  j["out"] = cfg.out_dir;
  j["seed"] = cfg.seed;
  j["model"] = {{"hidden", cfg.hidden},
                {"embed", cfg.embed},
                {"attention", cfg.attn},
                {"encoder_layers", cfg.enc_layers},
                {"dropout", cfg.dropout},
                {"sampling_prob", cfg.sampling_prob}};
  j["tasks"] = nlohmann::ordered_json::array();
  for (const TaskSpec& t : cfg.aux_tasks) {
    nlohmann::ordered_json task;
    task["type"] = task_type_name(t.type);
    task["layer"] = t.layer;
    if (t.type == TaskType::kStateFrames) task["sampled_softmax"] = t.sampled_softmax;
    j["tasks"].push_back(task);
  }
  j["training"] = {{"batch_size", cfg.batch_size},
                   {"total_updates", cfg.total_updates},
                   {"eval_interval", cfg.eval_interval},
                   {"lr", cfg.lr},
                   {"lr_decay", cfg.lr_decay},
                   {"literal_decay", cfg.literal_decay},
                   {"clip_norm", cfg.clip_norm},
                   {"duplicate_cap", cfg.duplicate_cap},
                   {"threads", cfg.threads}};
  return j;
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.data_root.empty() || cfg.out_dir.empty()) {
    throw ConfigError("config needs 'data' and 'out' paths");
  }
  if (cfg.enc_layers < 1 || cfg.enc_layers > 4) {
    throw ConfigError("encoder_layers must be in 1..4");
  }
  if (cfg.hidden < 1 || cfg.embed < 1 || cfg.attn < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (cfg.batch_size < 1 || cfg.total_updates < 1 || cfg.eval_interval < 1) {
    throw ConfigError("batch_size, total_updates and eval_interval must be positive");
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
  if (cfg.sampling_prob < 0.0 || cfg.sampling_prob > 1.0) {
    throw ConfigError("sampling_prob must be in [0,1]");
  }
  if (cfg.lr <= 0.0 || cfg.lr_decay <= 0.0 || cfg.lr_decay > 1.0) {
    throw ConfigError("lr must be positive and lr_decay in (0,1]");
  }
  for (const TaskSpec& t : cfg.aux_tasks) {
    if (t.type == TaskType::kCharDecoder) {
      throw ConfigError("the character decoder is built in; do not list it as a task");
    }
    if (t.layer < 1 || t.layer > static_cast<int>(cfg.enc_layers)) {
      throw ConfigError("task layer " + std::to_string(t.layer) + " outside 1.." +
                        std::to_string(cfg.enc_layers));
    }
    if (t.type == TaskType::kPhoneCtc && t.layer == 4) {
      throw ConfigError(
          "phone-ctc cannot attach at layer 4: after the 8-fold time reduction the top layer is "
          "often shorter than the phone sequence, and CTC needs more frames than output symbols");
    }
  }
}

double lr_schedule_update(double prev_dev_loss, double new_dev_loss, double lr, double factor,
                          bool literal) {
  bool decay = literal ? new_dev_loss < prev_dev_loss : new_dev_loss > prev_dev_loss;
  return decay ? factor * lr : lr;
}

EvalReport evaluate(const Model& model, const std::vector<Utterance>& utterances,
                    const std::string& mode) {
  if (utterances.empty()) throw Error("evaluate: empty dataset");
  EvalReport report;
  report.mode = mode;

  if (mode == "loss") {
    double total = 0.0;
    std::size_t chars = 0;
    for (const Utterance& u : utterances) {
      Tape tape;
      Binding bind = bind_params(tape, model.params);
      EncoderStates enc = model_encode(tape, bind, model.cfg, u.features, u.frames(), false, 0);
      DecoderParams dec = decoder_params(bind, "dec.char", model.chars.require_sos(),
                                         model.chars.require_eos());
      Rng rng(0);
      NodeId loss = teacher_forced_loss(tape, attended(tape, enc, model.cfg.enc_layers - 1),
                                        u.chars, 0.0, rng, dec);
      total += tape.value(loss).scalar_value();
      chars += u.chars.tokens.size() + 1;
    }
    report.value = total / static_cast<double>(chars);
    return report;
  }

  if (mode != "cer" && mode != "wer") throw ConfigError("unknown eval mode '" + mode + "'");
  ScoreUnit unit = mode == "cer" ? ScoreUnit::kChar : ScoreUnit::kWord;
  std::size_t errors = 0;
  std::size_t ref_total = 0;
  for (const Utterance& u : utterances) {
    TokenSequence hyp = transcribe(model, u.features, u.frames());
    std::string hyp_text = model.chars.to_text(hyp.tokens);
    std::string ref_text = model.chars.to_text(u.chars.tokens);
    ErrorReport r = edit_distance(tokenize(hyp_text, unit), tokenize(ref_text, unit));
    errors += r.distance();
    ref_total += r.reference_length;
    report.substitutions += r.substitutions;
    report.deletions += r.deletions;
    report.insertions += r.insertions;
    report.per_utt.push_back({u.id, r});
  }
  if (ref_total == 0) throw Error("evaluate: empty reference corpus");
  report.reference_length = ref_total;
  report.value = static_cast<double>(errors) / static_cast<double>(ref_total);
  return report;
}

namespace {

struct ItemOut {
  std::vector<Tensor> grads;
  double combined = 0.0;
  double char_loss = 0.0;
  std::size_t char_count = 0;
  bool ctc_skipped = false;
};

ItemOut process_item(const Model& model, const Utterance& utt, const BatchItem& item,
                     std::uint64_t item_seed) {
  Tape tape;
  tape.reserve(4096);
  Binding bind = bind_params(tape, model.params);
  LossBundle bundle = utterance_losses(tape, bind, model, item.features, item.true_len, utt.chars,
                                       utt.phones, utt.states, true, item_seed);
  GradientMap grads = tape.backward(bundle.combined);

  ItemOut out;
  out.combined = bundle.combined_value;
  const TaskLoss* char_task = bundle.find("char");
  out.char_loss = char_task->value;
  out.char_count = utt.chars.tokens.size() + 1;
  for (const TaskLoss& t : bundle.entries) {
    if (!t.active && t.name.rfind("phone-ctc", 0) == 0) out.ctc_skipped = true;
  }
  out.grads.reserve(bind.ids.size());
  for (NodeId id : bind.ids) out.grads.push_back(std::move(grads.at(id)));
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream rc(fs::path(cfg.out_dir) / "resolved-config.json", std::ios::binary);
    if (!rc) throw IoError("cannot write resolved-config.json under " + cfg.out_dir);
    rc << resolved_config_json(cfg).dump(2) << "\n";
  }

  Dataset train_set = load_dataset(cfg.data_root, "train", cfg.duplicate_cap);
  Dataset dev_set = load_dataset(cfg.data_root, "dev");

  Model model;
  model.cfg.feat_dim = train_set.utterances.front().features.cols();
  model.cfg.hidden = cfg.hidden;
  model.cfg.embed = cfg.embed;
  model.cfg.attn = cfg.attn;
  model.cfg.enc_layers = cfg.enc_layers;
  model.cfg.char_vocab = train_set.chars.size();
  model.cfg.phone_vocab = train_set.phones.size();
  model.cfg.state_vocab = train_set.states.size();
  model.cfg.aux_tasks = cfg.aux_tasks;
  model.cfg.dropout = cfg.dropout;
  model.cfg.sampling_prob = cfg.sampling_prob;
  model.chars = train_set.chars;
  model.phones = train_set.phones;
  model.states = train_set.states;

  bool needs_states = false;
  for (const TaskSpec& t : cfg.aux_tasks) needs_states |= t.type == TaskType::kStateFrames;
  if (needs_states) {
    for (const Utterance& u : train_set.utterances) {
      if (!u.states) {
        throw ConfigError("state-frames task configured but utterance " + u.id +
                          " has no state alignment");
      }
    }
  }

  model.params = init_params(model.cfg, cfg.seed);
  AdamState adam;
  adam.lr = cfg.lr;
  quantize_f32(model.params, adam);

  TrainResult result;
  result.metrics_path = (fs::path(cfg.out_dir) / "metrics.csv").string();
  result.best_ckpt_path = (fs::path(cfg.out_dir) / "best.ckpt").string();
  result.last_ckpt_path = (fs::path(cfg.out_dir) / "last.ckpt").string();
  result.best_dev_loss = std::numeric_limits<double>::infinity();

  std::ofstream csv(result.metrics_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + result.metrics_path);
  csv << "update,combined_loss,char_ll_per_char,lr,dev_loss,dev_cer\n";

  const std::size_t n_threads = resolve_threads(cfg.threads);
  const std::size_t batches_per_epoch =
      (train_set.utterances.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<Batch> batches;
  std::size_t epoch = static_cast<std::size_t>(-1);
  std::optional<double> prev_dev;

  for (std::uint64_t update = 1; update <= cfg.total_updates; ++update) {
    std::size_t want_epoch = (update - 1) / batches_per_epoch;
    if (want_epoch != epoch) {
      epoch = want_epoch;
      batches = make_batches(train_set.utterances, cfg.batch_size, mix_seed(cfg.seed, 0xE50C, epoch));
    }
    const Batch& batch = batches[(update - 1) % batches_per_epoch];
    const std::size_t b = batch.items.size();

    std::vector<ItemOut> outs(b);
    {
      std::vector<std::thread> workers;
      std::vector<std::exception_ptr> errors(n_threads);
      for (std::size_t w = 0; w < std::min(n_threads, b); ++w) {
        workers.emplace_back([&, w]() {
          try {
            for (std::size_t i = w; i < b; i += n_threads) {
              const BatchItem& item = batch.items[i];
              outs[i] = process_item(model, train_set.utterances[item.utt_index], item,
                                     mix_seed(cfg.seed, update, i));
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : workers) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    // Fixed-order reduction keeps results independent of thread timing.
    std::vector<Tensor> grads = std::move(outs[0].grads);
    double combined_sum = outs[0].combined;
    double char_loss_sum = outs[0].char_loss;
    std::size_t char_count = outs[0].char_count;
    std::size_t ctc_skipped = outs[0].ctc_skipped ? 1 : 0;
    for (std::size_t i = 1; i < b; ++i) {
      for (std::size_t p = 0; p < grads.size(); ++p) {
        Tensor& acc = grads[p];
        const Tensor& g = outs[i].grads[p];
        for (std::size_t c = 0; c < acc.numel(); ++c) acc.at(c) += g.at(c);
      }
      combined_sum += outs[i].combined;
      char_loss_sum += outs[i].char_loss;
      char_count += outs[i].char_count;
      ctc_skipped += outs[i].ctc_skipped ? 1 : 0;
    }
    double inv_b = 1.0 / static_cast<double>(b);
    for (Tensor& g : grads) {
      for (double& v : g.data()) v *= inv_b;
    }
    double combined_mean = combined_sum * inv_b;
    double char_ll = -char_loss_sum / static_cast<double>(char_count);
    result.ctc_infeasible_total += ctc_skipped;
    result.char_ll_history.push_back(char_ll);

    if (!std::isfinite(combined_mean)) {
      throw Error("training diverged at update " + std::to_string(update) +
                  ": non-finite combined loss " + fmt_double(combined_mean));
    }

    clip_global_norm(grads, cfg.clip_norm);
    adam_step(model.params, grads, adam);
    quantize_f32(model.params, adam);

    csv << update << "," << fmt_double(combined_mean) << "," << fmt_double(char_ll) << ","
        << fmt_double(adam.lr);
    if (update % cfg.eval_interval == 0 || update == cfg.total_updates) {
      double dev_loss = evaluate(model, dev_set.utterances, "loss").value;
      double dev_cer = evaluate(model, dev_set.utterances, "cer").value;
      if (prev_dev) {
        adam.lr = lr_schedule_update(*prev_dev, dev_loss, adam.lr, cfg.lr_decay, cfg.literal_decay);
      }
      prev_dev = dev_loss;
      result.dev_history.push_back({update, dev_loss, dev_cer});

      save_checkpoint(result.last_ckpt_path, model, adam, update);
      if (dev_loss < result.best_dev_loss) {
        result.best_dev_loss = dev_loss;
        result.best_dev_cer = dev_cer;
        result.best_update = update;
        save_checkpoint(result.best_ckpt_path, model, adam, update);
      }
      csv << "," << fmt_double(dev_loss) << "," << fmt_double(dev_cer) << "\n";
      std::printf("update %llu | loss %.4f | char_ll %.4f | lr %.3g | dev_loss %.4f | "
                  "dev_cer %.4f | ctc_skipped %zu\n",
                  static_cast<unsigned long long>(update), combined_mean, char_ll, adam.lr,
                  dev_loss, dev_cer, result.ctc_infeasible_total);
      std::fflush(stdout);
    } else {
      csv << ",,\n";
    }
  }
  csv.flush();
  return result;
}

}  // namespace mtasr
