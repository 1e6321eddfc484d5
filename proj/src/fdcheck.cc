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

#include "mtasr/fdcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtasr {

namespace {

double eval_loss(const LossBuilder& build, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const Tensor& p : params) ids.push_back(tape.parameter(p));
  NodeId loss = build(tape, ids);
  return tape.value(loss).scalar_value();
}

}  // namespace

double finite_difference_check(const LossBuilder& build, const std::vector<Tensor>& params,
                               double epsilon) {
  if (epsilon <= 0.0) throw Error("finite_difference_check: epsilon must be positive");

  Tape tape;
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const Tensor& p : params) ids.push_back(tape.parameter(p));
  NodeId loss = build(tape, ids);
  GradientMap grads = tape.backward(loss);

  const double inf = std::numeric_limits<double>::infinity();
  double max_err = 0.0;
  std::vector<Tensor> work = params;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor& analytic = grads.at(ids[pi]);
    for (std::size_t c = 0; c < params[pi].numel(); ++c) {
      double orig = work[pi].at(c);
      work[pi].at(c) = orig + epsilon;
      double f_plus = eval_loss(build, work);
      work[pi].at(c) = orig - epsilon;
      double f_minus = eval_loss(build, work);
      work[pi].at(c) = orig;

      double numeric = (f_plus - f_minus) / (2.0 * epsilon);
      double a = analytic.at(c);
      if (!std::isfinite(numeric) || !std::isfinite(a)) return inf;
      double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      max_err = std::max(max_err, std::fabs(a - numeric) / denom);
    }
  }
  return max_err;
}

}  // namespace mtasr
