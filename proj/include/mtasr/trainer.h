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
#include <vector>

#include <json.hpp>

#include "mtasr/adam.h"
#include "mtasr/data.h"
#include "mtasr/metrics.h"
#include "mtasr/model.h"

namespace mtasr {

struct TrainConfig {
  std::string data_root;
  std::string out_dir;
  std::uint64_t seed = 1;

  std::size_t hidden = 256;
  std::size_t embed = 256;
  std::size_t attn = 256;
  std::size_t enc_layers = 4;
  std::vector<TaskSpec> aux_tasks;
  double dropout = 0.1;
  double sampling_prob = 0.1;

  std::size_t batch_size = 64;
  std::size_t total_updates = 75000;
  std::size_t eval_interval = 1000;
  double lr = 1e-3;
  double lr_decay = 0.95;
  // The decay trigger compares dev negative log-likelihoods: decay when dev
  // got worse. literal_decay flips it to decay when dev improved.
  bool literal_decay = false;
  double clip_norm = 5.0;
  std::size_t duplicate_cap = 300;
  std::size_t threads = 0;  // 0 = pick from hardware
};

TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_file(const std::string& path);
nlohmann::ordered_json resolved_config_json(const TrainConfig& cfg);
void validate_config(const TrainConfig& cfg);

/// lr' = factor * lr when the new dev loss is strictly worse than the
/// previous one (strictly better under literal mode); ties leave lr alone.
double lr_schedule_update(double prev_dev_loss, double new_dev_loss, double lr, double factor,
                          bool literal = false);

struct EvalReport {
  std::string mode;  // loss | cer | wer
  double value = 0.0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;
  std::vector<UttScore> per_utt;
};

/// loss mode: per-character negative log-likelihood (EOS counted). cer/wer:
/// greedy decoding scored against the reference transcript, pooled.
EvalReport evaluate(const Model& model, const std::vector<Utterance>& utterances,
                    const std::string& mode);

struct DevPoint {
  std::uint64_t update = 0;
  double dev_loss = 0.0;
  double dev_cer = 0.0;
};

struct TrainResult {
  std::string best_ckpt_path;
  std::string last_ckpt_path;
  std::string metrics_path;
  double best_dev_loss = 0.0;
  double best_dev_cer = 0.0;
  std::uint64_t best_update = 0;
  std::size_t ctc_infeasible_total = 0;
  std::vector<double> char_ll_history;  // one entry per update
  std::vector<DevPoint> dev_history;
};

/// Full update loop: batch, encode, per-task losses, averaged combination,
/// backward, clipped Adam step. Writes resolved-config.json, metrics.csv, and
/// last/best checkpoints under out_dir; keeps the best dev checkpoint rather
/// than halting early. Aborts with a diagnostic on non-finite losses.
TrainResult train(const TrainConfig& cfg);

}  // namespace mtasr
