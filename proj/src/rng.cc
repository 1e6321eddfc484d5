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

#include "mtasr/rng.h"

#include <algorithm>
#include <numeric>

#include "mtasr/tensor.h"

namespace mtasr {

std::vector<int> Rng::sample_without_replacement(int limit, int excluded, std::size_t n) {
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(limit));
  for (int v = 0; v < limit; ++v) {
    if (v != excluded) pool.push_back(v);
  }
  if (n > pool.size()) throw Error("sample_without_replacement: not enough candidates");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::size_t Rng::categorical(const std::vector<double>& probs) {
  double u = uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;  // guard against accumulated rounding
}

}  // namespace mtasr
