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

#include "sbsr/autograd/autograd.hpp"

#include <cmath>
#include <unordered_set>

#include "sbsr/core/error.hpp"

namespace sbsr::ag {

namespace {

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": shapes (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    ") and (" + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  }
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void Node::Accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Var MakeResult(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> backward) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || v.requires_grad();
  Var out(std::move(value), needs);
  if (needs) {
    Node* n = out.node();
    n->inputs.reserve(inputs.size());
    for (const Var& v : inputs) n->inputs.push_back(v.shared());
    n->backward = std::move(backward);
  }
  return out;
}

void Backward(const Var& root) {
  if (!root.requires_grad()) return;
  // Iterative post-order DFS gives a topological order without recursion.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->grad = Matrix::Ones(root.rows(), root.cols());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->backward || n->grad.size() == 0) continue;
    n->backward(*n);
    n->grad.resize(0, 0);
  }
}

Var MatMul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::kShapeMismatch, "MatMul inner dimensions differ");
  return MakeResult(a.value() * b.value(), {a, b}, [](Node& n) {
    Node& a = n.input(0);
    Node& b = n.input(1);
    if (a.requires_grad) a.AccumulateExpr(n.grad * b.value.transpose());
    if (b.requires_grad) b.AccumulateExpr(a.value.transpose() * n.grad);
  });
}

Var MatMulNT(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::kShapeMismatch, "MatMulNT inner dimensions differ");
  return MakeResult(a.value() * b.value().transpose(), {a, b}, [](Node& n) {
    Node& a = n.input(0);
    Node& b = n.input(1);
    if (a.requires_grad) a.AccumulateExpr(n.grad * b.value);
    if (b.requires_grad) b.AccumulateExpr(n.grad.transpose() * a.value);
  });
}

Var Transpose(const Var& a) {
  return MakeResult(a.value().transpose(), {a}, [](Node& n) { n.input(0).AccumulateExpr(n.grad.transpose()); });
}

Var Add(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Add");
  return MakeResult(a.value() + b.value(), {a, b}, [](Node& n) {
    if (n.input(0).requires_grad) n.input(0).Accumulate(n.grad);
    if (n.input(1).requires_grad) n.input(1).Accumulate(n.grad);
  });
}

Var Sub(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Sub");
  return MakeResult(a.value() - b.value(), {a, b}, [](Node& n) {
    if (n.input(0).requires_grad) n.input(0).Accumulate(n.grad);
    if (n.input(1).requires_grad) n.input(1).AccumulateExpr(-n.grad);
  });
}

Var AddRowBroadcast(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw Error(ErrorCode::kShapeMismatch, "AddRowBroadcast");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return MakeResult(std::move(out), {a, row}, [](Node& n) {
    if (n.input(0).requires_grad) n.input(0).Accumulate(n.grad);
    if (n.input(1).requires_grad) n.input(1).AccumulateExpr(n.grad.colwise().sum());
  });
}

Var Scale(const Var& a, double s) {
  return MakeResult(a.value() * s, {a}, [s](Node& n) { n.input(0).AccumulateExpr(n.grad * s); });
}

Var ScaleBy(const Var& a, const Var& s) {
  if (s.rows() != 1 || s.cols() != 1) throw Error(ErrorCode::kShapeMismatch, "ScaleBy expects a 1x1 scale");
  return MakeResult(a.value() * s.scalar(), {a, s}, [](Node& n) {
    Node& a = n.input(0);
    Node& s = n.input(1);
    if (a.requires_grad) a.AccumulateExpr(n.grad * s.value(0, 0));
    if (s.requires_grad) {
      Matrix g(1, 1);
      g(0, 0) = n.grad.cwiseProduct(a.value).sum();
      s.Accumulate(g);
    }
  });
}

Var Mul(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Mul");
  return MakeResult(a.value().cwiseProduct(b.value()), {a, b}, [](Node& n) {
    Node& a = n.input(0);
    Node& b = n.input(1);
    if (a.requires_grad) a.AccumulateExpr(n.grad.cwiseProduct(b.value));
    if (b.requires_grad) b.AccumulateExpr(n.grad.cwiseProduct(a.value));
  });
}

Var Silu(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) { return x * Sigmoid(x); });
  return MakeResult(std::move(out), {a}, [](Node& n) {
    Node& a = n.input(0);
    Matrix d = a.value.unaryExpr([](double x) {
      const double s = Sigmoid(x);
      return s * (1.0 + x * (1.0 - s));
    });
    a.AccumulateExpr(n.grad.cwiseProduct(d));
  });
}

Var Tanh(const Var& a) {
  Matrix out = a.value().array().tanh().matrix();
  return MakeResult(std::move(out), {a}, [](Node& n) {
    n.input(0).AccumulateExpr(n.grad.cwiseProduct((1.0 - n.value.array().square()).matrix()));
  });
}

Var SoftmaxRows(const Var& a) {
  Matrix out = a.value();
  for (Index r = 0; r < out.rows(); ++r) {
    const double m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return MakeResult(std::move(out), {a}, [](Node& n) {
    const Matrix& y = n.value;
    Eigen::VectorXd dot = n.grad.cwiseProduct(y).rowwise().sum();
    Matrix d = n.grad;
    d.colwise() -= dot;
    n.input(0).AccumulateExpr(d.cwiseProduct(y));
  });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "ConcatCols of nothing");
  Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != parts[0].rows()) throw Error(ErrorCode::kShapeMismatch, "ConcatCols row counts differ");
    cols += p.cols();
  }
  Matrix out(parts[0].rows(), cols);
  std::vector<Index> offsets;
  Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    offsets.push_back(c);
    c += p.cols();
  }
  return MakeResult(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [offsets](Node& n) {
    for (std::size_t i = 0; i < n.inputs.size(); ++i) {
      Node& in = n.input(i);
      if (in.requires_grad) in.AccumulateExpr(n.grad.middleCols(offsets[i], in.value.cols()));
    }
  });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "ConcatRows of nothing");
  Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != parts[0].cols()) throw Error(ErrorCode::kShapeMismatch, "ConcatRows column counts differ");
    rows += p.rows();
  }
  Matrix out(rows, parts[0].cols());
  std::vector<Index> offsets;
  Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    offsets.push_back(r);
    r += p.rows();
  }
  return MakeResult(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [offsets](Node& n) {
    for (std::size_t i = 0; i < n.inputs.size(); ++i) {
      Node& in = n.input(i);
      if (in.requires_grad) in.AccumulateExpr(n.grad.middleRows(offsets[i], in.value.rows()));
    }
  });
}

Var SliceRows(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) throw Error(ErrorCode::kShapeMismatch, "SliceRows range");
  return MakeResult(a.value().middleRows(start, count), {a}, [start, count](Node& n) {
    Node& a = n.input(0);
    if (a.grad.size() == 0) a.grad = Matrix::Zero(a.value.rows(), a.value.cols());
    a.grad.middleRows(start, count) += n.grad;
  });
}

Var SliceCols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw Error(ErrorCode::kShapeMismatch, "SliceCols range");
  return MakeResult(a.value().middleCols(start, count), {a}, [start, count](Node& n) {
    Node& a = n.input(0);
    if (a.grad.size() == 0) a.grad = Matrix::Zero(a.value.rows(), a.value.cols());
    a.grad.middleCols(start, count) += n.grad;
  });
}

Var Reshape(const Var& a, Index rows, Index cols) {
  if (rows * cols != a.value().size()) throw Error(ErrorCode::kShapeMismatch, "Reshape size mismatch");
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return MakeResult(std::move(out), {a}, [](Node& n) {
    Node& a = n.input(0);
    a.AccumulateExpr(Eigen::Map<const Matrix>(n.grad.data(), a.value.rows(), a.value.cols()));
  });
}

Var LeftApply(std::shared_ptr<const SparseMatrix> op, const Var& a) {
  if (op->cols() != a.rows()) throw Error(ErrorCode::kShapeMismatch, "LeftApply operator width");
  Matrix out = (*op) * a.value();
  return MakeResult(std::move(out), {a}, [op](Node& n) {
    n.input(0).AccumulateExpr(Matrix(op->transpose() * n.grad));
  });
}

Var GroupNorm(const Var& x, int groups, const Var& gamma, const Var& beta, double eps) {
  const Index rows = x.rows();
  const Index channels = x.cols();
  if (groups <= 0 || channels % groups != 0) throw Error(ErrorCode::kShapeMismatch, "GroupNorm groups must divide channels");
  if (gamma.cols() != channels || beta.cols() != channels) throw Error(ErrorCode::kShapeMismatch, "GroupNorm affine width");
  const Index per = channels / groups;
  const double count = static_cast<double>(rows * per);
  Matrix normalized(rows, channels);
  std::vector<double> inv_std(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g) {
    auto block = x.value().middleCols(g * per, per);
    const double mean = block.sum() / count;
    const double var = (block.array() - mean).square().sum() / count;
    inv_std[static_cast<std::size_t>(g)] = 1.0 / std::sqrt(var + eps);
    normalized.middleCols(g * per, per) = ((block.array() - mean) * inv_std[static_cast<std::size_t>(g)]).matrix();
  }
  Matrix out = normalized;
  out.array().rowwise() *= gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  return MakeResult(std::move(out), {x, gamma, beta},
                    [normalized = std::move(normalized), inv_std = std::move(inv_std), groups, per, count](Node& n) {
                      Node& x = n.input(0);
                      Node& gamma = n.input(1);
                      Node& beta = n.input(2);
                      if (gamma.requires_grad) gamma.AccumulateExpr(n.grad.cwiseProduct(normalized).colwise().sum());
                      if (beta.requires_grad) beta.AccumulateExpr(n.grad.colwise().sum());
                      if (!x.requires_grad) return;
                      Matrix dhat = n.grad;
                      dhat.array().rowwise() *= gamma.value.row(0).array();
                      Matrix dx(dhat.rows(), dhat.cols());
                      for (int g = 0; g < groups; ++g) {
                        auto dh = dhat.middleCols(g * per, per).array();
                        auto xh = normalized.middleCols(g * per, per).array();
                        const double sum_dh = dh.sum();
                        const double sum_dh_xh = (dh * xh).sum();
                        dx.middleCols(g * per, per) =
                            ((count * dh - sum_dh - xh * sum_dh_xh) * (inv_std[static_cast<std::size_t>(g)] / count))
                                .matrix();
                      }
                      x.Accumulate(dx);
                    });
}

Var MaxRows(const Var& a) {
  if (a.rows() == 0) throw Error(ErrorCode::kShapeMismatch, "MaxRows of empty matrix");
  Matrix out(1, a.cols());
  std::vector<Index> argmax(static_cast<std::size_t>(a.cols()));
  for (Index c = 0; c < a.cols(); ++c) {
    Index best = 0;
    for (Index r = 1; r < a.rows(); ++r) {
      if (a.value()(r, c) > a.value()(best, c)) best = r;
    }
    argmax[static_cast<std::size_t>(c)] = best;
    out(0, c) = a.value()(best, c);
  }
  return MakeResult(std::move(out), {a}, [argmax = std::move(argmax)](Node& n) {
    Node& a = n.input(0);
    if (a.grad.size() == 0) a.grad = Matrix::Zero(a.value.rows(), a.value.cols());
    for (std::size_t c = 0; c < argmax.size(); ++c) a.grad(argmax[c], static_cast<Index>(c)) += n.grad(0, static_cast<Index>(c));
  });
}

Var L2NormalizeRows(const Var& a, double eps) {
  Eigen::VectorXd norms = a.value().rowwise().norm().cwiseMax(eps);
  Matrix out = a.value();
  for (Index r = 0; r < out.rows(); ++r) out.row(r) /= norms(r);
  return MakeResult(std::move(out), {a}, [norms = std::move(norms)](Node& n) {
    const Matrix& y = n.value;
    Eigen::VectorXd dot = n.grad.cwiseProduct(y).rowwise().sum();
    Matrix d = n.grad - (y.array().colwise() * dot.array()).matrix();
    for (Index r = 0; r < d.rows(); ++r) d.row(r) /= norms(r);
    n.input(0).Accumulate(d);
  });
}

Var Sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return MakeResult(std::move(out), {a}, [](Node& n) {
    Node& a = n.input(0);
    a.AccumulateExpr(Matrix::Constant(a.value.rows(), a.value.cols(), n.grad(0, 0)));
  });
}

Var Mean(const Var& a) {
  const double count = static_cast<double>(a.value().size());
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / count;
  return MakeResult(std::move(out), {a}, [count](Node& n) {
    Node& a = n.input(0);
    a.AccumulateExpr(Matrix::Constant(a.value.rows(), a.value.cols(), n.grad(0, 0) / count));
  });
}

Var SumSquares(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return MakeResult(std::move(out), {a}, [](Node& n) {
    Node& a = n.input(0);
    a.AccumulateExpr(a.value * (2.0 * n.grad(0, 0)));
  });
}

Var CrossEntropy(const Var& logits, std::span<const int> labels) {
  const Index rows = logits.rows();
  if (static_cast<Index>(labels.size()) != rows) throw Error(ErrorCode::kShapeMismatch, "CrossEntropy label count");
  Matrix probs(rows, logits.cols());
  double total = 0.0;
  for (Index r = 0; r < rows; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= logits.cols()) throw Error(ErrorCode::kUnknownLabel, "label index out of range");
    const double m = logits.value().row(r).maxCoeff();
    const double lse = m + std::log((logits.value().row(r).array() - m).exp().sum());
    total += lse - logits.value()(r, y);
    probs.row(r) = (logits.value().row(r).array() - lse).exp().matrix();
  }
  Matrix out(1, 1);
  out(0, 0) = rows == 0 ? 0.0 : total / static_cast<double>(rows);
  std::vector<int> owned(labels.begin(), labels.end());
  return MakeResult(std::move(out), {logits}, [probs = std::move(probs), owned = std::move(owned)](Node& n) {
    if (owned.empty()) return;
    Matrix d = probs;
    for (std::size_t r = 0; r < owned.size(); ++r) d(static_cast<Index>(r), owned[r]) -= 1.0;
    d *= n.grad(0, 0) / static_cast<double>(owned.size());
    n.input(0).Accumulate(d);
  });
}

}  // namespace sbsr::ag
