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

#include <functional>
#include <vector>

#include "mtasr/tape.h"

namespace mtasr {

/// Builds a scalar loss on a fresh tape from already-registered parameter
/// nodes (one per entry of the params vector, in order). Must be
/// deterministic given fixed dropout/sampling seeds.
using LossBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

/// Compares reverse-mode gradients against central differences
/// (f(p+eps) - f(p-eps)) / (2 eps) for every coordinate of every parameter.
/// Returns the max of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8);
/// non-finite intermediate values report as infinity.
double finite_difference_check(const LossBuilder& build, const std::vector<Tensor>& params,
                               double epsilon);

}  // namespace mtasr
