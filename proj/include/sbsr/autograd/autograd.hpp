// Copyright 2026 The sbsr Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "sbsr/core/tensor.hpp"

// Minimal tape-free reverse-mode differentiation over dense row-major
// matrices. Each op records its inputs and a backward closure on the result
// node; Backward() walks the DAG in reverse topological order. Nodes that do
// not depend on any parameter carry no closure, so inference pays only for
// the forward values.
namespace sbsr::ag {

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node& self)> backward;

  void Accumulate(const Matrix& g);
  template <typename Expr>
  void AccumulateExpr(const Expr& g) {
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
  Node& input(std::size_t i) { return *inputs[i]; }
};

class Var {
 public:
  Var() = default;
  Var(Matrix value, bool requires_grad);

  static Var Constant(Matrix value) { return Var(std::move(value), false); }
  static Var Parameter(Matrix value) { return Var(std::move(value), true); }

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  // Only the optimizer and checkpoint loader write through this.
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  void ZeroGrad() { node_->grad.resize(0, 0); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  double scalar() const { return node_->value(0, 0); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Creates a result node; the closure is kept only if some input needs a gradient.
Var MakeResult(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> backward);

// Seeds d(root)/d(root) = 1 and accumulates into every reachable parameter.
void Backward(const Var& root);

Var MatMul(const Var& a, const Var& b);
Var MatMulNT(const Var& a, const Var& b);  // a * b^T
Var Transpose(const Var& a);
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var AddRowBroadcast(const Var& a, const Var& row);
Var Scale(const Var& a, double s);
Var ScaleBy(const Var& a, const Var& s);  // s is 1x1
Var Mul(const Var& a, const Var& b);
Var Silu(const Var& a);
Var Tanh(const Var& a);
Var SoftmaxRows(const Var& a);
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var SliceRows(const Var& a, Index start, Index count);
Var SliceCols(const Var& a, Index start, Index count);
// Reinterprets the row-major buffer with a new shape.
Var Reshape(const Var& a, Index rows, Index cols);
// Constant linear operator applied on the left (pooling, resampling).
Var LeftApply(std::shared_ptr<const SparseMatrix> op, const Var& a);
// Normalizes over (rows x channels-in-group) per group, then per-channel affine.
Var GroupNorm(const Var& x, int groups, const Var& gamma, const Var& beta, double eps = 1e-5);
// Column-wise max over rows -> (1 x cols). Ties resolve to the first row.
Var MaxRows(const Var& a);
Var L2NormalizeRows(const Var& a, double eps = 1e-12);
Var Sum(const Var& a);
Var Mean(const Var& a);
Var SumSquares(const Var& a);
// Mean softmax cross-entropy of each logits row against its label.
Var CrossEntropy(const Var& logits, std::span<const int> labels);

}  // namespace sbsr::ag
