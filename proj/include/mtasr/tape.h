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
#include <unordered_map>
#include <vector>

#include "mtasr/tensor.h"

namespace mtasr {

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kMatMul,
  kAdd,
  kMul,
  kConcat,
  kSlice,
  kTanh,
  kSigmoid,
  kExp,
  kLog,
  kSoftmax,
  kLogSoftmax,
  kEmbedding,
  kDropout,
  kSum,
  kPick,
  kGatherCols,
  kScale,
  kLogAddExp,
  kTranspose,
  kPyramidPack,
};

/// Per-primitive attributes for apply_primitive and for saved forward state.
struct Attrs {
  int axis = -1;  // -1 means "whole tensor" for sum, unset otherwise
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<int> indices;  // pick / gather / embedding lookups
  double rate = 0.0;         // dropout
  std::uint64_t seed = 0;    // dropout mask seed
  double alpha = 1.0;        // scale factor
  std::vector<std::uint8_t> mask;  // dropout keep mask, filled at forward time
};

struct Node {
  Op op;
  std::vector<NodeId> inputs;
  Tensor value;
  Attrs attrs;
};

/// Gradients keyed by parameter node id. Parameters unreachable from the loss
/// map to zero tensors of matching shape.
using GradientMap = std::unordered_map<NodeId, Tensor>;

/// Append-only reverse-mode differentiation tape. Nodes are in topological
/// order by construction; backward() visits each node exactly once. A Tape is
/// single-owner and single-threaded; run independent utterances on separate
/// tapes.
class Tape {
 public:
  NodeId constant(Tensor v);
  NodeId parameter(Tensor v);

  const std::vector<NodeId>& parameters() const { return params_; }
  const Tensor& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  std::size_t size() const { return nodes_.size(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  NodeId matmul(NodeId a, NodeId b);
  /// Same-shape addition, or row broadcast when one side is [1, m] and the
  /// other [n, m] (bias-vector addition to each row; the only broadcast).
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId concat(int axis, const std::vector<NodeId>& xs);
  NodeId slice(NodeId x, int axis, std::size_t begin, std::size_t end);
  NodeId tanh(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId exp(NodeId x);
  NodeId log(NodeId x);
  NodeId softmax(NodeId x, int axis);
  NodeId log_softmax(NodeId x, int axis);
  NodeId embedding(NodeId table, std::vector<int> ids);
  NodeId dropout(NodeId x, double rate, std::uint64_t seed);
  NodeId sum(NodeId x);  // whole tensor -> [1,1]
  NodeId sum(NodeId x, int axis);
  /// Row-wise selection: x [n,V] with n indices -> [n,1]; rank-1 x with one
  /// index -> [1].
  NodeId pick(NodeId x, std::vector<int> ids);
  /// Per-row column gather: x [n,V], ids laid out row-major [n*k] -> [n,k].
  NodeId gather_cols(NodeId x, std::vector<int> ids, std::size_t k);
  NodeId scale(NodeId x, double alpha);
  NodeId logaddexp(NodeId a, NodeId b);
  NodeId transpose(NodeId x);
  /// Concatenates adjacent row pairs: [n,w] -> [ceil(n/2), 2w]; an odd final
  /// row is paired with itself.
  NodeId pyramid_pack(NodeId x);

  /// Name-dispatched primitive application. Accepts: matmul, add,
  /// mul-elementwise, concat, slice, tanh, sigmoid, exp, log, softmax,
  /// embedding-lookup, dropout, sum, pick.
  NodeId apply_primitive(const std::string& op, const std::vector<NodeId>& inputs,
                         const Attrs& attrs = {});

  GradientMap backward(NodeId loss) const;

 private:
  NodeId push(Op op, std::vector<NodeId> inputs, Tensor value, Attrs attrs = {});
  const Tensor& val(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  std::vector<Node> nodes_;
  std::vector<NodeId> params_;
};

}  // namespace mtasr
