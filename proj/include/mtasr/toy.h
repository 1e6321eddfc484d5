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
#include <string>

namespace mtasr {

/// Synthetic corpus recipe: every character expands to 1-2 phones through a
/// fixed random lexicon; every phone emits frames_per_phone copies of its
/// random template plus Gaussian noise. State labels split each phone's
/// frames into two sub-states.
struct ToySpec {
  std::size_t n_train = 500;
  std::size_t n_dev = 100;
  std::size_t char_vocab = 10;
  std::size_t phones = 6;
  std::size_t frames_per_phone = 4;
  std::size_t feat_dim = 16;
  double noise_sigma = 0.1;
  std::size_t min_len = 3;   // characters per utterance
  std::size_t max_len = 12;
  std::size_t speakers = 10;
};

ToySpec toy_spec_from_json_file(const std::string& path);

/// Writes vocab.{chars,phones,states}.txt, manifest.{train,dev}.jsonl, label
/// files, and per-utterance feature files under out_dir. Same spec and seed
/// always produce a bit-identical dataset.
void generate_toy_corpus(const ToySpec& spec, const std::string& out_dir, std::uint64_t seed);

}  // namespace mtasr
