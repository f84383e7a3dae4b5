//
// Copyright 2026 The HBC Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef HBC_AUTODIFF_H_
#define HBC_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hbc/tensor.h"

namespace hbc::ad {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
};

// Lower clamp applied to probabilities before taking logarithms.
inline constexpr double kLogEps = 1e-12;

// Tape of differentiable nodes. Nodes are appended in creation order, so a
// node's parents always precede it and the graph is acyclic by construction.
// A graph is confined to a single thread.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Trainable input; receives a gradient.
  Var Leaf(Tensor value);
  // Input held constant; gradients are not tracked through it.
  Var Constant(Tensor value);

  // Populates the gradient of every node that requires one. The root must
  // be scalar. A second call requires ZeroGrads() in between.
  void Backward(Var root);
  void ZeroGrads();

  const Tensor& value(size_t id) const { return nodes_[id].value; }
  const Tensor& grad(size_t id) const;
  bool requires_grad(size_t id) const { return nodes_[id].requires_grad; }
  size_t size() const { return nodes_.size(); }

  // Used by op implementations: appends a node computed from `parents`.
  Var Record(Tensor value, std::vector<size_t> parents, BackwardFn backward);
  // Gradient slot of a parent, or nullptr if it does not require grad.
  Tensor* MutableGrad(size_t id);
  const Tensor& OutGrad(size_t id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<size_t> parents;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Forward ops. Every op validates shapes, computes in 64-bit, rejects
// non-finite results and registers its backward rule.

// (n x k) * (k x m).
Var MatMul(Var a, Var b);
// Elementwise sum; `b` may also be a 1 x m row added to every row of `a`.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
// Elementwise (Hadamard) product of equal shapes.
Var Mul(Var a, Var b);
Var MulScalar(Var a, double c);
Var AddScalar(Var a, double c);
Var LeakyRelu(Var x, double slope);
Var Sigmoid(Var x);
// Row-wise softmax of x / temperature.
Var Softmax(Var x, double temperature = 1.0);
// log(clamp(x, eps, 1)); the gradient vanishes where the clamp is active.
Var LogClamped(Var x, double eps = kLogEps);
Var Sum(Var x);
Var Mean(Var x);
// n x m -> n x 1 sums over each row.
Var RowSum(Var x);
Var SelectRow(Var x, size_t row);
// n x m -> n x 1 taking column index[r] from row r.
Var Pick(Var x, std::span<const int> index);
// [a | b] for equal row counts.
Var ConcatCols(Var a, Var b);

}  // namespace hbc::ad

#endif  // HBC_AUTODIFF_H_
