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
#include <span>
#include <string>
#include <vector>

#include "mtasr/framewise.h"
#include "mtasr/tensor.h"
#include "mtasr/vocab.h"

namespace mtasr {

struct Utterance {
  std::string id;
  std::string speaker;
  Tensor features;  // [T, D] after deltas and normalization
  TokenSequence chars;
  TokenSequence phones;
  std::optional<StateAlignment> states;  // length T when present

  std::size_t frames() const { return features.rows(); }
};

/// Binary feature file: magic "FB01", then T and D as u32 LE, then T*D f32 LE
/// row-major.
Tensor read_feature_matrix(const std::string& path);
void write_feature_matrix(const std::string& path, const Tensor& features);

/// Per-speaker mean/variance normalization, statistics pooled over all frames
/// of all utterances in the span (one speaker). Std is floored at 1e-8.
void cmvn(std::span<Utterance> speaker_utterances);

/// Groups by speaker id and normalizes each group.
void cmvn_by_speaker(std::vector<Utterance>& utterances);

/// Appends regression deltas (window 2, replicate-boundary):
/// delta_t = sum_{n=1..2} n (x_{t+n} - x_{t-n}) / (2 sum n^2). [T,D] -> [T,2D].
Tensor add_deltas(const Tensor& base);

/// Keeps at most `threshold` utterances per distinct character transcript,
/// earliest in corpus order first.
std::vector<Utterance> cap_duplicate_transcripts(std::vector<Utterance> utterances,
                                                 std::size_t threshold);

struct BatchItem {
  std::size_t utt_index;
  Tensor features;  // zero-padded to the batch max frame count
  std::size_t true_len;
};

struct Batch {
  std::vector<BatchItem> items;
};

/// Seeded shuffle, then fixed-size groups (last group may be short). Within a
/// batch, features are zero-padded to the batch max T; true lengths ride
/// along so downstream losses can mask the padding.
std::vector<Batch> make_batches(const std::vector<Utterance>& utterances, std::size_t size,
                                std::uint64_t seed);

struct Dataset {
  std::vector<Utterance> utterances;
  Vocabulary chars;
  Vocabulary phones;
  Vocabulary states;
};

/// Loads a split from a dataset directory: manifest.<split>.jsonl lines of
/// {"id","speaker","features","chars","phones","states"} with paths relative
/// to the directory, plus vocab.{chars,phones,states}.txt. Applies deltas and
/// per-speaker normalization, and validates every tier.
Dataset load_dataset(const std::string& root, const std::string& split,
                     std::size_t duplicate_cap = 0);

}  // namespace mtasr
