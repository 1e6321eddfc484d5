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

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "mtasr/checkpoint.h"
#include "mtasr/data.h"
#include "mtasr/metrics.h"
#include "mtasr/selfcheck.h"
#include "mtasr/toy.h"
#include "mtasr/trainer.h"

namespace {

int cmd_gen_toy(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed) {
  mtasr::ToySpec spec;
  if (!spec_path.empty()) spec = mtasr::toy_spec_from_json_file(spec_path);
  mtasr::generate_toy_corpus(spec, out_dir, seed);
  std::printf("wrote toy corpus (%zu train / %zu dev utterances) to %s\n", spec.n_train,
              spec.n_dev, out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& config_path) {
  mtasr::TrainConfig cfg = mtasr::train_config_from_file(config_path);
  mtasr::TrainResult result = mtasr::train(cfg);
  std::printf("done: best dev_loss %.6f (cer %.4f) at update %llu\n", result.best_dev_loss,
              result.best_dev_cer, static_cast<unsigned long long>(result.best_update));
  std::printf("checkpoints: %s, %s\n", result.best_ckpt_path.c_str(),
              result.last_ckpt_path.c_str());
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data, const std::string& metric,
             const std::string& split, const std::string& report_path) {
  mtasr::LoadedCheckpoint loaded = mtasr::load_checkpoint(ckpt);
  mtasr::Dataset ds = mtasr::load_dataset(data, split);
  if (ds.chars.symbols != loaded.model.chars.symbols) {
    throw mtasr::ConfigError("vocabulary mismatch between checkpoint and dataset");
  }
  mtasr::EvalReport report = mtasr::evaluate(loaded.model, ds.utterances, metric);
  if (metric == "loss") {
    std::printf("%s %s: per-char nll %.6f over %zu utterances\n", split.c_str(), metric.c_str(),
                report.value, ds.utterances.size());
  } else {
    std::printf("%s %s: %.4f (sub %zu, del %zu, ins %zu, ref %zu)\n", split.c_str(),
                metric.c_str(), report.value, report.substitutions, report.deletions,
                report.insertions, report.reference_length);
    if (!report_path.empty()) {
      mtasr::write_score_csv(report_path, report.per_utt);
      std::printf("wrote per-utterance report to %s\n", report_path.c_str());
    }
  }
  return 0;
}

int cmd_decode(const std::string& ckpt, const std::string& features_path) {
  mtasr::LoadedCheckpoint loaded = mtasr::load_checkpoint(ckpt);
  mtasr::Tensor base = mtasr::read_feature_matrix(features_path);
  mtasr::Utterance u;
  u.id = std::filesystem::path(features_path).stem().string();
  u.speaker = u.id;
  u.features = mtasr::add_deltas(base);
  {
    std::vector<mtasr::Utterance> one;
    one.push_back(std::move(u));
    mtasr::cmvn(one);
    u = std::move(one.front());
  }
  if (u.features.cols() != loaded.model.cfg.feat_dim) {
    throw mtasr::ConfigError("feature dimension " + std::to_string(u.features.cols()) +
                             " does not match checkpoint input width " +
                             std::to_string(loaded.model.cfg.feat_dim));
  }
  mtasr::TokenSequence hyp = mtasr::transcribe(loaded.model, u.features, u.frames());
  std::printf("%s\t%s\n", u.id.c_str(), loaded.model.chars.to_text(hyp.tokens).c_str());
  return 0;
}

int cmd_grad_check(std::uint64_t seed) {
  std::vector<mtasr::CheckResult> results = mtasr::gradient_selfcheck(seed);
  bool ok = true;
  for (const mtasr::CheckResult& r : results) {
    std::printf("%-16s max_rel_err %.3e (threshold %.0e) %s\n", r.name.c_str(), r.max_rel_err,
                r.threshold, r.ok() ? "ok" : "FAIL");
    ok &= r.ok();
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multitask sequence recognition trainer"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-toy", "generate a synthetic toy corpus");
  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 1;
  gen->add_option("--spec", gen_spec, "JSON spec file (defaults when omitted)");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "generation seed");

  auto* train = app.add_subcommand("train", "train a model from a JSON config");
  std::string train_config;
  train->add_option("--config", train_config, "JSON run config")->required();

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset split");
  std::string eval_ckpt, eval_data, eval_metric = "cer", eval_split = "dev", eval_report;
  eval->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--metric", eval_metric, "cer | wer | loss");
  eval->add_option("--split", eval_split, "dataset split (default dev)");
  eval->add_option("--report", eval_report, "write per-utterance CSV here");

  auto* decode = app.add_subcommand("decode", "transcribe one feature file");
  std::string dec_ckpt, dec_features;
  decode->add_option("--ckpt", dec_ckpt, "checkpoint file")->required();
  decode->add_option("--features", dec_features, "feature file")->required();

  auto* grad = app.add_subcommand("grad-check", "finite-difference self check");
  std::string grad_scale = "tiny";
  std::uint64_t grad_seed = 7;
  grad->add_option("--scale", grad_scale, "suite scale (tiny)");
  grad->add_option("--seed", grad_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << app.help() << std::endl;
    return app.exit(e, std::cerr, std::cerr) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_toy(gen_spec, gen_out, gen_seed);
    if (train->parsed()) return cmd_train(train_config);
    if (eval->parsed()) {
      if (eval_metric != "cer" && eval_metric != "wer" && eval_metric != "loss") {
        throw mtasr::ConfigError("--metric must be cer, wer or loss");
      }
      return cmd_eval(eval_ckpt, eval_data, eval_metric, eval_split, eval_report);
    }
    if (decode->parsed()) return cmd_decode(dec_ckpt, dec_features);
    if (grad->parsed()) {
      if (grad_scale != "tiny") throw mtasr::ConfigError("--scale must be 'tiny'");
      return cmd_grad_check(grad_seed);
    }
  } catch (const mtasr::ConfigError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 1;
}
