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
#include <vector>

#include "mtasr/model.h"

namespace mtasr {

struct CheckResult {
  std::string name;
  double max_rel_err = 0.0;
  double threshold = 0.0;

  bool ok() const { return max_rel_err < threshold; }
};

/// One utterance plus a small model with every loss type attached: two
/// encoder layers (hidden 4), character decoder on top, phone decoder and
/// phone CTC at layer 1, state classification at layer 2, T = 12 frames.
struct TinyFixture {
  Model model;
  Tensor features;
  TokenSequence chars;
  TokenSequence phones;
  StateAlignment states;
};

TinyFixture build_tiny_fixture(std::uint64_t seed);

/// Finite-difference error of the combined four-task loss over every
/// parameter of the tiny fixture (dropout on with a fixed mask, scheduled
/// sampling off).
double tiny_fixture_fd_error(const TinyFixture& fixture, double epsilon);

/// Per-module finite-difference sweep used by the grad-check CLI command.
std::vector<CheckResult> gradient_selfcheck(std::uint64_t seed);

}  // namespace mtasr
