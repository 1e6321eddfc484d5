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

#include "mtasr/toy.h"

#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "mtasr/data.h"
#include "mtasr/rng.h"
#include "mtasr/vocab.h"

namespace mtasr {

ToySpec toy_spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open toy spec " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("toy spec " + path + ": " + e.what());
  }
  ToySpec spec;
  spec.n_train = j.value("n_train", spec.n_train);
  spec.n_dev = j.value("n_dev", spec.n_dev);
  spec.char_vocab = j.value("char_vocab", spec.char_vocab);
  spec.phones = j.value("phones", spec.phones);
  spec.frames_per_phone = j.value("frames_per_phone", spec.frames_per_phone);
  spec.feat_dim = j.value("feat_dim", spec.feat_dim);
  spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
  spec.min_len = j.value("min_len", spec.min_len);
  spec.max_len = j.value("max_len", spec.max_len);
  spec.speakers = j.value("speakers", spec.speakers);
  return spec;
}

namespace {

void validate(const ToySpec& spec) {
  if (spec.n_train < 1 || spec.char_vocab < 1 || spec.char_vocab > 26 || spec.phones < 1 ||
      spec.frames_per_phone < 1 || spec.feat_dim < 1 || spec.min_len < 1 ||
      spec.max_len < spec.min_len || spec.noise_sigma < 0.0 || spec.speakers < 1) {
    throw ConfigError("invalid toy corpus spec");
  }
}

struct Lexicon {
  std::vector<std::vector<int>> phones_of_char;       // phone ids in [0, P)
  std::vector<std::vector<double>> phone_templates;   // [P][feat_dim]
};

Lexicon build_lexicon(const ToySpec& spec, Rng& rng) {
  Lexicon lex;
  lex.phones_of_char.resize(spec.char_vocab);
  for (auto& pron : lex.phones_of_char) {
    std::size_t n = 1 + rng.index(2);
    for (std::size_t i = 0; i < n; ++i) pron.push_back(static_cast<int>(rng.index(spec.phones)));
  }
  lex.phone_templates.resize(spec.phones);
  for (auto& tpl : lex.phone_templates) {
    tpl.resize(spec.feat_dim);
    for (double& v : tpl) v = rng.normal();
  }
  return lex;
}

}  // namespace

void generate_toy_corpus(const ToySpec& spec, const std::string& out_dir, std::uint64_t seed) {
  validate(spec);
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "feats" / "train");
  fs::create_directories(fs::path(out_dir) / "feats" / "dev");

  std::vector<std::string> char_symbols = {kSosSymbol, kEosSymbol};
  for (std::size_t i = 0; i < spec.char_vocab; ++i) {
    char_symbols.push_back(std::string(1, static_cast<char>('a' + i)));
  }
  Vocabulary chars = Vocabulary::from_symbols("chars", std::move(char_symbols));

  std::vector<std::string> phone_symbols = {kBlankSymbol, kSosSymbol, kEosSymbol};
  for (std::size_t i = 0; i < spec.phones; ++i) phone_symbols.push_back("p" + std::to_string(i));
  Vocabulary phones = Vocabulary::from_symbols("phones", std::move(phone_symbols));
  const int phone_base = static_cast<int>(phones.size() - spec.phones);

  std::vector<std::string> state_symbols;
  for (std::size_t i = 0; i < 2 * spec.phones; ++i) state_symbols.push_back("s" + std::to_string(i));
  Vocabulary states = Vocabulary::from_symbols("states", std::move(state_symbols));

  chars.save((fs::path(out_dir) / "vocab.chars.txt").string());
  phones.save((fs::path(out_dir) / "vocab.phones.txt").string());
  states.save((fs::path(out_dir) / "vocab.states.txt").string());

  Rng lex_rng(mix_seed(seed, 0xC0));
  Lexicon lex = build_lexicon(spec, lex_rng);

  for (const std::string& split : {std::string("train"), std::string("dev")}) {
    std::size_t count = split == "train" ? spec.n_train : spec.n_dev;
    std::ofstream manifest(fs::path(out_dir) / ("manifest." + split + ".jsonl"),
                           std::ios::binary);
    std::ofstream char_labels(fs::path(out_dir) / ("labels." + split + ".chars.txt"),
                              std::ios::binary);
    std::ofstream phone_labels(fs::path(out_dir) / ("labels." + split + ".phones.txt"),
                               std::ios::binary);
    std::ofstream state_labels(fs::path(out_dir) / ("labels." + split + ".states.txt"),
                               std::ios::binary);
    if (!manifest || !char_labels || !phone_labels || !state_labels) {
      throw IoError("cannot write toy corpus files under " + out_dir);
    }

    for (std::size_t n = 0; n < count; ++n) {
      Rng rng(mix_seed(seed, split == "train" ? 1 : 2, n));
      std::string id = split + "-" + std::to_string(n);
      std::string speaker = "spk" + std::to_string(n % spec.speakers);

      std::size_t len = spec.min_len + rng.index(spec.max_len - spec.min_len + 1);
      std::vector<int> char_ids(len);
      for (auto& c : char_ids) c = static_cast<int>(rng.index(spec.char_vocab));

      std::vector<int> phone_seq;  // raw phone ids in [0, P)
      for (int c : char_ids) {
        const auto& pron = lex.phones_of_char[static_cast<std::size_t>(c)];
        phone_seq.insert(phone_seq.end(), pron.begin(), pron.end());
      }

      const std::size_t frames = phone_seq.size() * spec.frames_per_phone;
      Tensor feats({frames, spec.feat_dim});
      std::vector<int> state_seq(frames);
      std::size_t t = 0;
      const std::size_t first_half = (spec.frames_per_phone + 1) / 2;
      for (int p : phone_seq) {
        for (std::size_t f = 0; f < spec.frames_per_phone; ++f, ++t) {
          for (std::size_t d = 0; d < spec.feat_dim; ++d) {
            double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
            feats.at(t, d) = lex.phone_templates[static_cast<std::size_t>(p)][d] + noise;
          }
          state_seq[t] = 2 * p + (f < first_half ? 0 : 1);
        }
      }

      std::string feat_rel = "feats/" + split + "/" + id + ".fb";
      write_feature_matrix((fs::path(out_dir) / feat_rel).string(), feats);

      char_labels << id << "\t";
      for (std::size_t i = 0; i < char_ids.size(); ++i) {
        char_labels << (i ? " " : "") << static_cast<char>('a' + char_ids[i]);
      }
      char_labels << "\n";

      phone_labels << id << "\t";
      for (std::size_t i = 0; i < phone_seq.size(); ++i) {
        phone_labels << (i ? " " : "") << phones.symbols[static_cast<std::size_t>(
                                              phone_base + phone_seq[i])];
      }
      phone_labels << "\n";

      state_labels << id << "\t";
      for (std::size_t i = 0; i < state_seq.size(); ++i) {
        state_labels << (i ? " " : "") << state_seq[i];
      }
      state_labels << "\n";

      nlohmann::ordered_json entry;
      entry["id"] = id;
      entry["speaker"] = speaker;
      entry["features"] = feat_rel;
      entry["chars"] = "labels." + split + ".chars.txt";
      entry["phones"] = "labels." + split + ".phones.txt";
      entry["states"] = "labels." + split + ".states.txt";
      manifest << entry.dump() << "\n";
    }
  }

  nlohmann::ordered_json meta;
  meta["seed"] = seed;
  meta["n_train"] = spec.n_train;
  meta["n_dev"] = spec.n_dev;
  meta["char_vocab"] = spec.char_vocab;
  meta["phones"] = spec.phones;
  meta["frames_per_phone"] = spec.frames_per_phone;
  meta["feat_dim"] = spec.feat_dim;
  meta["noise_sigma"] = spec.noise_sigma;
  meta["min_len"] = spec.min_len;
  meta["max_len"] = spec.max_len;
  meta["speakers"] = spec.speakers;
  std::ofstream meta_out(fs::path(out_dir) / "toy-meta.json", std::ios::binary);
  meta_out << meta.dump(2) << "\n";
}

}  // namespace mtasr
