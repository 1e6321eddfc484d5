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

#include "mtasr/tape.h"

#include <algorithm>
#include <cmath>

#include "mtasr/rng.h"

namespace mtasr {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

std::string op_shapes(const std::string& op, const std::vector<const Tensor*>& ts) {
  std::string s = op + ":";
  for (const Tensor* t : ts) s += " " + t->shape_str();
  return s;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

NodeId Tape::push(Op op, std::vector<NodeId> inputs, Tensor value, Attrs attrs) {
  nodes_.push_back(Node{op, std::move(inputs), std::move(value), std::move(attrs)});
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(Tensor v) { return push(Op::kConstant, {}, std::move(v)); }

NodeId Tape::parameter(Tensor v) {
  NodeId id = push(Op::kParameter, {}, std::move(v));
  params_.push_back(id);
  return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  require(A.rank() == 2 && B.rank() == 2 && A.cols() == B.rows(),
          "shape mismatch in " + op_shapes("matmul", {&A, &B}));
  std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor C({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      double av = A.at(i, kk);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) C.at(i, j) += av * B.at(kk, j);
    }
  }
  return push(Op::kMatMul, {a, b}, std::move(C));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (A.same_shape(B)) {
    Tensor C = A;
    for (std::size_t i = 0; i < C.numel(); ++i) C.at(i) += B.at(i);
    return push(Op::kAdd, {a, b}, std::move(C));
  }
  // Row broadcast: [n,m] + [1,m] in either order.
  const bool a_big = A.rank() == 2 && B.rank() == 2 && B.rows() == 1 && A.cols() == B.cols();
  const bool b_big = A.rank() == 2 && B.rank() == 2 && A.rows() == 1 && A.cols() == B.cols();
  require(a_big || b_big, "shape mismatch in " + op_shapes("add", {&A, &B}));
  const Tensor& big = a_big ? A : B;
  const Tensor& bias = a_big ? B : A;
  Tensor C = big;
  for (std::size_t i = 0; i < C.rows(); ++i) {
    for (std::size_t j = 0; j < C.cols(); ++j) C.at(i, j) += bias.at(0, j);
  }
  return push(Op::kAdd, {a, b}, std::move(C));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  require(A.same_shape(B), "shape mismatch in " + op_shapes("mul-elementwise", {&A, &B}));
  Tensor C = A;
  for (std::size_t i = 0; i < C.numel(); ++i) C.at(i) *= B.at(i);
  return push(Op::kMul, {a, b}, std::move(C));
}

NodeId Tape::concat(int axis, const std::vector<NodeId>& xs) {
  require(!xs.empty(), "concat: needs at least one input");
  const Tensor& first = val(xs[0]);
  std::size_t rank = first.rank();
  require(rank <= 2 && axis >= 0 && static_cast<std::size_t>(axis) < rank,
          "concat: bad axis " + std::to_string(axis) + " for rank " + std::to_string(rank));
  for (NodeId x : xs) {
    const Tensor& t = val(x);
    require(t.rank() == rank, "shape mismatch in concat: " + t.shape_str());
  }
  if (rank == 1) {
    std::vector<double> out;
    for (NodeId x : xs) {
      const auto& d = val(x).data();
      out.insert(out.end(), d.begin(), d.end());
    }
    return push(Op::kConcat, xs, Tensor::vec(std::move(out)), Attrs{.axis = axis});
  }
  if (axis == 0) {
    std::size_t cols = first.cols(), total = 0;
    for (NodeId x : xs) {
      require(val(x).cols() == cols, "shape mismatch in concat axis 0: " + val(x).shape_str());
      total += val(x).rows();
    }
    Tensor C({total, cols});
    std::size_t r = 0;
    for (NodeId x : xs) {
      const Tensor& t = val(x);
      std::copy(t.data().begin(), t.data().end(), C.data().begin() + static_cast<long>(r * cols));
      r += t.rows();
    }
    return push(Op::kConcat, xs, std::move(C), Attrs{.axis = axis});
  }
  std::size_t rows = first.rows(), total = 0;
  for (NodeId x : xs) {
    require(val(x).rows() == rows, "shape mismatch in concat axis 1: " + val(x).shape_str());
    total += val(x).cols();
  }
  Tensor C({rows, total});
  std::size_t off = 0;
  for (NodeId x : xs) {
    const Tensor& t = val(x);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < t.cols(); ++j) C.at(i, off + j) = t.at(i, j);
    }
    off += t.cols();
  }
  return push(Op::kConcat, xs, std::move(C), Attrs{.axis = axis});
}

NodeId Tape::slice(NodeId x, int axis, std::size_t begin, std::size_t end) {
  const Tensor& X = val(x);
  require(X.rank() <= 2 && axis >= 0 && static_cast<std::size_t>(axis) < X.rank(),
          "slice: bad axis for " + X.shape_str());
  std::size_t dim = X.shape()[static_cast<std::size_t>(axis)];
  require(begin < end && end <= dim, "slice: bad range [" + std::to_string(begin) + "," +
                                         std::to_string(end) + ") for " + X.shape_str());
  Attrs attrs;
  attrs.axis = axis;
  attrs.begin = begin;
  attrs.end = end;
  if (X.rank() == 1) {
    std::vector<double> out(X.data().begin() + static_cast<long>(begin),
                            X.data().begin() + static_cast<long>(end));
    return push(Op::kSlice, {x}, Tensor::vec(std::move(out)), std::move(attrs));
  }
  if (axis == 0) {
    Tensor C({end - begin, X.cols()});
    std::copy(X.data().begin() + static_cast<long>(begin * X.cols()),
              X.data().begin() + static_cast<long>(end * X.cols()), C.data().begin());
    return push(Op::kSlice, {x}, std::move(C), std::move(attrs));
  }
  Tensor C({X.rows(), end - begin});
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = begin; j < end; ++j) C.at(i, j - begin) = X.at(i, j);
  }
  return push(Op::kSlice, {x}, std::move(C), std::move(attrs));
}

NodeId Tape::tanh(NodeId x) {
  Tensor C = val(x);
  for (double& v : C.data()) v = std::tanh(v);
  return push(Op::kTanh, {x}, std::move(C));
}

NodeId Tape::sigmoid(NodeId x) {
  Tensor C = val(x);
  for (double& v : C.data()) v = stable_sigmoid(v);
  return push(Op::kSigmoid, {x}, std::move(C));
}

NodeId Tape::exp(NodeId x) {
  Tensor C = val(x);
  for (double& v : C.data()) v = std::exp(v);
  return push(Op::kExp, {x}, std::move(C));
}

NodeId Tape::log(NodeId x) {
  Tensor C = val(x);
  for (double& v : C.data()) v = std::log(v);
  return push(Op::kLog, {x}, std::move(C));
}

namespace {

// Iterates rows along the softmax axis: rank-1 is a single row; rank-2 axis 1
// walks rows, axis 0 walks columns.
struct AxisView {
  std::size_t groups, len, group_stride, elem_stride;
};

AxisView axis_view(const Tensor& t, int axis) {
  require(t.rank() <= 2, "softmax: rank must be 1 or 2, got " + t.shape_str());
  if (t.rank() == 1) {
    require(axis == 0, "softmax: bad axis for rank-1 input");
    return {1, t.shape()[0], 0, 1};
  }
  require(axis == 0 || axis == 1, "softmax: bad axis");
  if (axis == 1) return {t.rows(), t.cols(), t.cols(), 1};
  return {t.cols(), t.rows(), 1, t.cols()};
}

}  // namespace

NodeId Tape::softmax(NodeId x, int axis) {
  const Tensor& X = val(x);
  AxisView v = axis_view(X, axis);
  Tensor C = X;
  for (std::size_t g = 0; g < v.groups; ++g) {
    double* base = C.data().data() + g * v.group_stride;
    double m = base[0];
    for (std::size_t i = 1; i < v.len; ++i) m = std::max(m, base[i * v.elem_stride]);
    double s = 0.0;
    for (std::size_t i = 0; i < v.len; ++i) {
      double e = std::exp(base[i * v.elem_stride] - m);
      base[i * v.elem_stride] = e;
      s += e;
    }
    for (std::size_t i = 0; i < v.len; ++i) base[i * v.elem_stride] /= s;
  }
  return push(Op::kSoftmax, {x}, std::move(C), Attrs{.axis = axis});
}

NodeId Tape::log_softmax(NodeId x, int axis) {
  const Tensor& X = val(x);
  AxisView v = axis_view(X, axis);
  Tensor C = X;
  for (std::size_t g = 0; g < v.groups; ++g) {
    double* base = C.data().data() + g * v.group_stride;
    double m = base[0];
    for (std::size_t i = 1; i < v.len; ++i) m = std::max(m, base[i * v.elem_stride]);
    double s = 0.0;
    for (std::size_t i = 0; i < v.len; ++i) s += std::exp(base[i * v.elem_stride] - m);
    double lse = m + std::log(s);
    for (std::size_t i = 0; i < v.len; ++i) base[i * v.elem_stride] -= lse;
  }
  return push(Op::kLogSoftmax, {x}, std::move(C), Attrs{.axis = axis});
}

NodeId Tape::embedding(NodeId table, std::vector<int> ids) {
  const Tensor& T = val(table);
  require(T.rank() == 2, "embedding-lookup: table must be rank 2, got " + T.shape_str());
  require(!ids.empty(), "embedding-lookup: empty index list");
  Tensor C({ids.size(), T.cols()});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= T.rows()) {
      throw Error("embedding-lookup: token " + std::to_string(ids[i]) + " out of range for table " +
                  T.shape_str());
    }
    for (std::size_t j = 0; j < T.cols(); ++j)
      C.at(i, j) = T.at(static_cast<std::size_t>(ids[i]), j);
  }
  Attrs attrs;
  attrs.indices = std::move(ids);
  return push(Op::kEmbedding, {table}, std::move(C), std::move(attrs));
}

NodeId Tape::dropout(NodeId x, double rate, std::uint64_t seed) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
  const Tensor& X = val(x);
  Attrs attrs;
  attrs.rate = rate;
  attrs.seed = seed;
  attrs.mask.resize(X.numel(), 1);
  Tensor C = X;
  if (rate > 0.0) {
    Rng rng(seed);
    double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < C.numel(); ++i) {
      if (rng.uniform() < rate) {
        attrs.mask[i] = 0;
        C.at(i) = 0.0;
      } else {
        C.at(i) *= keep_scale;
      }
    }
  }
  return push(Op::kDropout, {x}, std::move(C), std::move(attrs));
}

NodeId Tape::sum(NodeId x) {
  const Tensor& X = val(x);
  double s = 0.0;
  for (double v : X.data()) s += v;
  return push(Op::kSum, {x}, Tensor::scalar(s), Attrs{.axis = -1});
}

NodeId Tape::sum(NodeId x, int axis) {
  const Tensor& X = val(x);
  require(X.rank() <= 2, "sum: rank must be 1 or 2");
  if (X.rank() == 1) {
    require(axis == 0, "sum: bad axis for rank-1 input");
    return sum(x);
  }
  require(axis == 0 || axis == 1, "sum: bad axis");
  if (axis == 0) {
    Tensor C({1, X.cols()});
    for (std::size_t i = 0; i < X.rows(); ++i) {
      for (std::size_t j = 0; j < X.cols(); ++j) C.at(0, j) += X.at(i, j);
    }
    return push(Op::kSum, {x}, std::move(C), Attrs{.axis = 0});
  }
  Tensor C({X.rows(), 1});
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < X.cols(); ++j) C.at(i, 0) += X.at(i, j);
  }
  return push(Op::kSum, {x}, std::move(C), Attrs{.axis = 1});
}

NodeId Tape::pick(NodeId x, std::vector<int> ids) {
  const Tensor& X = val(x);
  if (X.rank() == 1) {
    require(ids.size() == 1, "pick: rank-1 input takes exactly one index");
    require(ids[0] >= 0 && static_cast<std::size_t>(ids[0]) < X.shape()[0],
            "pick: index out of range for " + X.shape_str());
    Tensor C = Tensor::vec({X.at(static_cast<std::size_t>(ids[0]))});
    Attrs attrs;
    attrs.indices = std::move(ids);
    return push(Op::kPick, {x}, std::move(C), std::move(attrs));
  }
  require(X.rank() == 2 && ids.size() == X.rows(),
          "pick: need one index per row of " + X.shape_str());
  Tensor C({X.rows(), 1});
  for (std::size_t i = 0; i < X.rows(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < X.cols(),
            "pick: index " + std::to_string(ids[i]) + " out of range for " + X.shape_str());
    C.at(i, 0) = X.at(i, static_cast<std::size_t>(ids[i]));
  }
  Attrs attrs;
  attrs.indices = std::move(ids);
  return push(Op::kPick, {x}, std::move(C), std::move(attrs));
}

NodeId Tape::gather_cols(NodeId x, std::vector<int> ids, std::size_t k) {
  const Tensor& X = val(x);
  require(X.rank() == 2 && k >= 1 && ids.size() == X.rows() * k,
          "gather_cols: need n*k indices for " + X.shape_str());
  Tensor C({X.rows(), k});
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      int c = ids[i * k + j];
      require(c >= 0 && static_cast<std::size_t>(c) < X.cols(),
              "gather_cols: index out of range for " + X.shape_str());
      C.at(i, j) = X.at(i, static_cast<std::size_t>(c));
    }
  }
  Attrs attrs;
  attrs.indices = std::move(ids);
  attrs.begin = k;
  return push(Op::kGatherCols, {x}, std::move(C), std::move(attrs));
}

NodeId Tape::scale(NodeId x, double alpha) {
  Tensor C = val(x);
  for (double& v : C.data()) v *= alpha;
  return push(Op::kScale, {x}, std::move(C), Attrs{.alpha = alpha});
}

NodeId Tape::logaddexp(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  require(A.same_shape(B), "shape mismatch in " + op_shapes("logaddexp", {&A, &B}));
  Tensor C = A;
  for (std::size_t i = 0; i < C.numel(); ++i) {
    double x = A.at(i), y = B.at(i);
    double m = std::max(x, y);
    C.at(i) = m + std::log(std::exp(x - m) + std::exp(y - m));
  }
  return push(Op::kLogAddExp, {a, b}, std::move(C));
}

NodeId Tape::transpose(NodeId x) {
  const Tensor& X = val(x);
  require(X.rank() == 2, "transpose: rank must be 2, got " + X.shape_str());
  Tensor C({X.cols(), X.rows()});
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < X.cols(); ++j) C.at(j, i) = X.at(i, j);
  }
  return push(Op::kTranspose, {x}, std::move(C));
}

NodeId Tape::pyramid_pack(NodeId x) {
  const Tensor& X = val(x);
  require(X.rank() == 2, "pyramid_pack: rank must be 2, got " + X.shape_str());
  std::size_t n = X.rows(), w = X.cols();
  std::size_t out_n = (n + 1) / 2;
  Tensor C({out_n, 2 * w});
  for (std::size_t i = 0; i < out_n; ++i) {
    std::size_t a = 2 * i;
    std::size_t b = std::min(2 * i + 1, n - 1);  // odd tail pairs with itself
    for (std::size_t j = 0; j < w; ++j) {
      C.at(i, j) = X.at(a, j);
      C.at(i, w + j) = X.at(b, j);
    }
  }
  return push(Op::kPyramidPack, {x}, std::move(C));
}

NodeId Tape::apply_primitive(const std::string& op, const std::vector<NodeId>& inputs,
                             const Attrs& attrs) {
  auto want = [&](std::size_t n) {
    require(inputs.size() == n,
            op + ": expected " + std::to_string(n) + " inputs, got " + std::to_string(inputs.size()));
  };
  if (op == "matmul") {
    want(2);
    return matmul(inputs[0], inputs[1]);
  }
  if (op == "add") {
    want(2);
    return add(inputs[0], inputs[1]);
  }
  if (op == "mul-elementwise") {
    want(2);
    return mul(inputs[0], inputs[1]);
  }
  if (op == "concat") return concat(attrs.axis, inputs);
  if (op == "slice") {
    want(1);
    return slice(inputs[0], attrs.axis, attrs.begin, attrs.end);
  }
  if (op == "tanh") {
    want(1);
    return tanh(inputs[0]);
  }
  if (op == "sigmoid") {
    want(1);
    return sigmoid(inputs[0]);
  }
  if (op == "exp") {
    want(1);
    return exp(inputs[0]);
  }
  if (op == "log") {
    want(1);
    return log(inputs[0]);
  }
  if (op == "softmax") {
    want(1);
    return softmax(inputs[0], attrs.axis);
  }
  if (op == "embedding-lookup") {
    want(1);
    return embedding(inputs[0], attrs.indices);
  }
  if (op == "dropout") {
    want(1);
    return dropout(inputs[0], attrs.rate, attrs.seed);
  }
  if (op == "sum") {
    want(1);
    return attrs.axis < 0 ? sum(inputs[0]) : sum(inputs[0], attrs.axis);
  }
  if (op == "pick") {
    want(1);
    return pick(inputs[0], attrs.indices);
  }
  throw Error("unknown primitive: " + op);
}

GradientMap Tape::backward(NodeId loss) const {
  if (loss < 0 || static_cast<std::size_t>(loss) >= nodes_.size()) {
    throw Error("backward: loss node not on this tape");
  }
  if (val(loss).numel() != 1) {
    throw Error("backward: loss must be scalar, got " + val(loss).shape_str());
  }
  std::vector<Tensor> grads(nodes_.size());
  grads[static_cast<std::size_t>(loss)] = Tensor::full(val(loss).shape(), 1.0);

  auto acc = [&](NodeId id, std::size_t flat_index, double v) {
    Tensor& g = grads[static_cast<std::size_t>(id)];
    if (g.empty()) g = Tensor::zeros(val(id).shape());
    g.at(flat_index) += v;
  };
  auto grad_buf = [&](NodeId id) -> Tensor& {
    Tensor& g = grads[static_cast<std::size_t>(id)];
    if (g.empty()) g = Tensor::zeros(val(id).shape());
    return g;
  };

  for (NodeId id = loss; id >= 0; --id) {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const Tensor& g = grads[static_cast<std::size_t>(id)];
    if (g.empty()) continue;
    const Tensor& y = node.value;
    switch (node.op) {
      case Op::kConstant:
      case Op::kParameter:
        break;
      case Op::kMatMul: {
        const Tensor& A = val(node.inputs[0]);
        const Tensor& B = val(node.inputs[1]);
        Tensor& dA = grad_buf(node.inputs[0]);
        Tensor& dB = grad_buf(node.inputs[1]);
        std::size_t n = A.rows(), k = A.cols(), m = B.cols();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t kk = 0; kk < k; ++kk) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += g.at(i, j) * B.at(kk, j);
            dA.at(i, kk) += s;
          }
        }
        for (std::size_t kk = 0; kk < k; ++kk) {
          for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += A.at(i, kk) * g.at(i, j);
            dB.at(kk, j) += s;
          }
        }
        break;
      }
      case Op::kAdd: {
        const Tensor& A = val(node.inputs[0]);
        const Tensor& B = val(node.inputs[1]);
        for (int side = 0; side < 2; ++side) {
          NodeId in = node.inputs[static_cast<std::size_t>(side)];
          const Tensor& X = side == 0 ? A : B;
          Tensor& dX = grad_buf(in);
          if (X.same_shape(y)) {
            for (std::size_t i = 0; i < y.numel(); ++i) dX.at(i) += g.at(i);
          } else {
            // broadcast bias side: column sums
            for (std::size_t i = 0; i < y.rows(); ++i) {
              for (std::size_t j = 0; j < y.cols(); ++j) dX.at(0, j) += g.at(i, j);
            }
          }
        }
        break;
      }
      case Op::kMul: {
        const Tensor& A = val(node.inputs[0]);
        const Tensor& B = val(node.inputs[1]);
        Tensor& dA = grad_buf(node.inputs[0]);
        Tensor& dB = grad_buf(node.inputs[1]);
        for (std::size_t i = 0; i < y.numel(); ++i) {
          dA.at(i) += g.at(i) * B.at(i);
          dB.at(i) += g.at(i) * A.at(i);
        }
        break;
      }
      case Op::kConcat: {
        int axis = node.attrs.axis;
        if (y.rank() == 1 || axis == 0) {
          std::size_t off = 0;
          for (NodeId in : node.inputs) {
            const Tensor& X = val(in);
            Tensor& dX = grad_buf(in);
            for (std::size_t i = 0; i < X.numel(); ++i) dX.at(i) += g.at(off + i);
            off += X.numel();
          }
        } else {
          std::size_t off = 0;
          for (NodeId in : node.inputs) {
            const Tensor& X = val(in);
            Tensor& dX = grad_buf(in);
            for (std::size_t i = 0; i < X.rows(); ++i) {
              for (std::size_t j = 0; j < X.cols(); ++j) dX.at(i, j) += g.at(i, off + j);
            }
            off += X.cols();
          }
        }
        break;
      }
      case Op::kSlice: {
        const Tensor& X = val(node.inputs[0]);
        Tensor& dX = grad_buf(node.inputs[0]);
        std::size_t b = node.attrs.begin;
        if (X.rank() == 1) {
          for (std::size_t i = 0; i < y.numel(); ++i) dX.at(b + i) += g.at(i);
        } else if (node.attrs.axis == 0) {
          for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t j = 0; j < y.cols(); ++j) dX.at(b + i, j) += g.at(i, j);
          }
        } else {
          for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t j = 0; j < y.cols(); ++j) dX.at(i, b + j) += g.at(i, j);
          }
        }
        break;
      }
      case Op::kTanh: {
        Tensor& dX = grad_buf(node.inputs[0]);
        for (std::size_t i = 0; i < y.numel(); ++i) dX.at(i) += g.at(i) * (1.0 - y.at(i) * y.at(i));
        break;
      }
      case Op::kSigmoid: {
        Tensor& dX = grad_buf(node.inputs[0]);
        for (std::size_t i = 0; i < y.numel(); ++i) dX.at(i) += g.at(i) * y.at(i) * (1.0 - y.at(i));
        break;
      }
      case Op::kExp: {
        Tensor& dX = grad_buf(node.inputs[0]);
        for (std::size_t i = 0; i < y.numel(); ++i) dX.at(i) += g.at(i) * y.at(i);
        break;
      }
      case Op::kLog: {
        const Tensor& X = val(node.inputs[0]);
        Tensor& dX = grad_buf(node.inputs[0]);
        for (std::size_t i = 0; i < y.numel(); ++i) dX.at(i) += g.at(i) / X.at(i);
        break;
      }
      case Op::kSoftmax: {
        Tensor& dX = grad_buf(node.inputs[0]);
        AxisView v = axis_view(y, node.attrs.axis);
        for (std::size_t grp = 0; grp < v.groups; ++grp) {
          std::size_t base = grp * v.group_stride;
          double dot = 0.0;
          for (std::size_t i = 0; i < v.len; ++i) {
            std::size_t idx = base + i * v.elem_stride;
            dot += g.at(idx) * y.at(idx);
          }
          for (std::size_t i = 0; i < v.len; ++i) {
            std::size_t idx = base + i * v.elem_stride;
            dX.at(idx) += y.at(idx) * (g.at(idx) - dot);
          }
        }
        break;
      }
      case Op::kLogSoftmax: {
        Tensor& dX = grad_buf(node.inputs[0]);
        AxisView v = axis_view(y, node.attrs.axis);
        for (std::size_t grp = 0; grp < v.groups; ++grp) {
          std::size_t base = grp * v.group_stride;
          double gsum = 0.0;
          for (std::size_t i = 0; i < v.len; ++i) gsum += g.at(base + i * v.elem_stride);
          for (std::size_t i = 0; i < v.len; ++i) {
            std::size_t idx = base + i * v.elem_stride;
            dX.at(idx) += g.at(idx) - std::exp(y.at(idx)) * gsum;
          }
        }
        break;
      }
      case Op::kEmbedding: {
        const Tensor& T = val(node.inputs[0]);
        Tensor& dT = grad_buf(node.inputs[0]);
        for (std::size_t i = 0; i < node.attrs.indices.size(); ++i) {
          std::size_t r = static_cast<std::size_t>(node.attrs.indices[i]);
          for (std::size_t j = 0; j < T.cols(); ++j) dT.at(r, j) += g.at(i, j);
        }
        break;
      }
      case Op::kDropout: {
        Tensor& dX = grad_buf(node.inputs[0]);
        double keep_scale = node.attrs.rate > 0.0 ? 1.0 / (1.0 - node.attrs.rate) : 1.0;
        for (std::size_t i = 0; i < y.numel(); ++i) {
          if (node.attrs.mask[i]) dX.at(i) += g.at(i) * keep_scale;
        }
        break;
      }
      case Op::kSum: {
        const Tensor& X = val(node.inputs[0]);
        Tensor& dX = grad_buf(node.inputs[0]);
        if (node.attrs.axis < 0) {
          double gv = g.at(0);
          for (std::size_t i = 0; i < X.numel(); ++i) dX.at(i) += gv;
        } else if (node.attrs.axis == 0) {
          for (std::size_t i = 0; i < X.rows(); ++i) {
            for (std::size_t j = 0; j < X.cols(); ++j) dX.at(i, j) += g.at(0, j);
          }
        } else {
          for (std::size_t i = 0; i < X.rows(); ++i) {
            for (std::size_t j = 0; j < X.cols(); ++j) dX.at(i, j) += g.at(i, 0);
          }
        }
        break;
      }
      case Op::kPick: {
        const Tensor& X = val(node.inputs[0]);
        if (X.rank() == 1) {
          acc(node.inputs[0], static_cast<std::size_t>(node.attrs.indices[0]), g.at(0));
        } else {
          Tensor& dX = grad_buf(node.inputs[0]);
          for (std::size_t i = 0; i < X.rows(); ++i) {
            dX.at(i, static_cast<std::size_t>(node.attrs.indices[i])) += g.at(i, 0);
          }
        }
        break;
      }
      case Op::kGatherCols: {
        const Tensor& X = val(node.inputs[0]);
        Tensor& dX = grad_buf(node.inputs[0]);
        std::size_t k = node.attrs.begin;
        for (std::size_t i = 0; i < X.rows(); ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            dX.at(i, static_cast<std::size_t>(node.attrs.indices[i * k + j])) += g.at(i, j);
          }
        }
        break;
      }
      case Op::kScale: {
        Tensor& dX = grad_buf(node.inputs[0]);
        for (std::size_t i = 0; i < y.numel(); ++i) dX.at(i) += g.at(i) * node.attrs.alpha;
        break;
      }
      case Op::kLogAddExp: {
        const Tensor& A = val(node.inputs[0]);
        const Tensor& B = val(node.inputs[1]);
        Tensor& dA = grad_buf(node.inputs[0]);
        Tensor& dB = grad_buf(node.inputs[1]);
        for (std::size_t i = 0; i < y.numel(); ++i) {
          double wa = stable_sigmoid(A.at(i) - B.at(i));
          dA.at(i) += g.at(i) * wa;
          dB.at(i) += g.at(i) * (1.0 - wa);
        }
        break;
      }
      case Op::kTranspose: {
        Tensor& dX = grad_buf(node.inputs[0]);
        for (std::size_t i = 0; i < y.rows(); ++i) {
          for (std::size_t j = 0; j < y.cols(); ++j) dX.at(j, i) += g.at(i, j);
        }
        break;
      }
      case Op::kPyramidPack: {
        const Tensor& X = val(node.inputs[0]);
        Tensor& dX = grad_buf(node.inputs[0]);
        std::size_t n = X.rows(), w = X.cols();
        for (std::size_t i = 0; i < y.rows(); ++i) {
          std::size_t a = 2 * i;
          std::size_t b = std::min(2 * i + 1, n - 1);
          for (std::size_t j = 0; j < w; ++j) {
            dX.at(a, j) += g.at(i, j);
            dX.at(b, j) += g.at(i, w + j);
          }
        }
        break;
      }
    }
  }

  GradientMap out;
  out.reserve(params_.size());
  for (NodeId p : params_) {
    Tensor& g = grads[static_cast<std::size_t>(p)];
    out.emplace(p, g.empty() ? Tensor::zeros(val(p).shape()) : std::move(g));
  }
  return out;
}

}  // namespace mtasr
