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

#include "mtasr/adam.h"

#include <cmath>

namespace mtasr {

void adam_step(ParamStore& params, const std::vector<Tensor>& grads, AdamState& state) {
  if (grads.size() != params.size()) throw Error("adam_step: gradient count mismatch");
  state.t += 1;
  const double b1 = state.hyper.beta1;
  const double b2 = state.hyper.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.names()[i];
    Tensor& theta = params.at_index(i);
    const Tensor& g = grads[i];
    if (!g.same_shape(theta)) {
      throw ShapeError("adam_step: gradient shape " + g.shape_str() + " vs parameter " +
                       theta.shape_str() + " for " + name);
    }
    Tensor& m = state.m.try_emplace(name, Tensor::zeros(theta.shape())).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor::zeros(theta.shape())).first->second;
    for (std::size_t c = 0; c < theta.numel(); ++c) {
      double gc = g.at(c);
      m.at(c) = b1 * m.at(c) + (1.0 - b1) * gc;
      v.at(c) = b2 * v.at(c) + (1.0 - b2) * gc * gc;
      double m_hat = m.at(c) / bc1;
      double v_hat = v.at(c) / bc2;
      theta.at(c) -= state.lr * m_hat / (std::sqrt(v_hat) + state.hyper.eps);
    }
  }
}

double clip_global_norm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.data()) sq += v * v;
  }
  double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    double factor = max_norm / norm;
    for (Tensor& g : grads) {
      for (double& v : g.data()) v *= factor;
    }
  }
  return norm;
}

void quantize_f32(Tensor& t) {
  for (double& v : t.data()) v = static_cast<double>(static_cast<float>(v));
}

void quantize_f32(ParamStore& params, AdamState& state) {
  for (std::size_t i = 0; i < params.size(); ++i) quantize_f32(params.at_index(i));
  for (auto& [name, t] : state.m) quantize_f32(t);
  for (auto& [name, t] : state.v) quantize_f32(t);
}

}  // namespace mtasr
