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
#include <unordered_map>
#include <vector>

#include "mtasr/model.h"
#include "mtasr/tensor.h"

namespace mtasr {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::unordered_map<std::string, Tensor> m;
  std::unordered_map<std::string, Tensor> v;
  std::uint64_t t = 0;
  double lr = 1e-3;
  AdamConfig hyper;
};

/// m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2; bias-corrected m_hat, v_hat;
/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps). Moments are created
/// lazily as zero tensors. grads follow the store order.
void adam_step(ParamStore& params, const std::vector<Tensor>& grads, AdamState& state);

/// Scales all gradients by max_norm/norm when the global L2 norm exceeds
/// max_norm; returns the pre-clip norm. max_norm <= 0 disables clipping.
double clip_global_norm(std::vector<Tensor>& grads, double max_norm);

/// Rounds every value to its nearest float32. Master weights live on the
/// float32 grid so the checkpoint encoding is lossless.
void quantize_f32(Tensor& t);
void quantize_f32(ParamStore& params, AdamState& state);

}  // namespace mtasr
