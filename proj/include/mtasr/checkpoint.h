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

#include "mtasr/adam.h"
#include "mtasr/model.h"

namespace mtasr {

/// Checkpoint layout, all integers unsigned 64-bit little-endian:
///   magic "MTLCKPT1"
///   tensor count N, then N entries of
///     name length, name bytes, rank, dims..., row-major f32 LE values
///   update counter
///   Adam entry count M, then M entries in the same tensor encoding
///     (adam.t, adam.lr, adam.m.<param>, adam.v.<param>)
/// Vocabularies ride along as byte tensors named meta.vocab.{chars,phones,
/// states} so a checkpoint is self-contained for decoding.
void save_checkpoint(const std::string& path, const Model& model, const AdamState& adam,
                     std::uint64_t update_counter);

struct LoadedCheckpoint {
  Model model;
  AdamState adam;
  std::uint64_t update_counter = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace mtasr
