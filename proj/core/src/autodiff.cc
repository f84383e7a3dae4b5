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

#include "hbc/autodiff.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "hbc/errors.h"

namespace hbc::ad {

const Tensor& Var::value() const { return graph->value(id); }
const Tensor& Var::grad() const { return graph->grad(id); }

Var Graph::Leaf(Tensor value) {
  CheckFinite(value, "graph leaf");
  nodes_.push_back(Node{std::move(value), Tensor(), true, {}, nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Graph::Constant(Tensor value) {
  CheckFinite(value, "graph constant");
  nodes_.push_back(Node{std::move(value), Tensor(), false, {}, nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Graph::Record(Tensor value, std::vector<size_t> parents,
                  BackwardFn backward) {
  bool needs = false;
  for (size_t p : parents) {
    if (p >= nodes_.size()) throw Error("op parent does not precede node");
    needs = needs || nodes_[p].requires_grad;
  }
  if (!needs) backward = nullptr;
  nodes_.push_back(Node{std::move(value), Tensor(), needs, std::move(parents),
                        std::move(backward)});
  return Var{this, nodes_.size() - 1};
}

const Tensor& Graph::grad(size_t id) const {
  const Node& n = nodes_[id];
  if (!n.requires_grad) throw Error("node does not track gradients");
  if (!backward_done_) throw Error("grad read before Backward()");
  return n.grad;
}

Tensor* Graph::MutableGrad(size_t id) {
  Node& n = nodes_[id];
  return n.requires_grad ? &n.grad : nullptr;
}

void Graph::Backward(Var root) {
  if (root.graph != this) throw Error("root belongs to another graph");
  if (backward_done_) {
    throw Error("Backward() called twice without ZeroGrads()");
  }
  if (!nodes_[root.id].value.is_scalar()) {
    throw ShapeError("Backward() root must be scalar, got " +
                     nodes_[root.id].value.ShapeString());
  }
  for (Node& n : nodes_) {
    if (n.requires_grad && n.grad.size() != n.value.size()) {
      n.grad = Tensor(n.value.shape(), 0.0);
    }
  }
  if (nodes_[root.id].requires_grad) {
    nodes_[root.id].grad[0] += 1.0;
    for (size_t i = root.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward) continue;
      for (size_t p : n.parents) {
        if (p >= i) throw Error("graph cycle detected");
      }
      n.backward(*this, i);
    }
  }
  backward_done_ = true;
}

void Graph::ZeroGrads() {
  for (Node& n : nodes_) {
    if (n.requires_grad) n.grad.Fill(0.0);
  }
  backward_done_ = false;
}

namespace {

Tensor Checked(Tensor t, const char* op) {
  CheckFinite(t, op);
  return t;
}

void RequireSameGraph(Var a, Var b) {
  if (a.graph != b.graph || a.graph == nullptr) {
    throw Error("operands belong to different graphs");
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.SameShape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.ShapeString() +
                     " vs " + b.ShapeString());
  }
}

// Shape of a rank-1/2 result with the given extents.
std::vector<size_t> Mat(size_t r, size_t c) { return {r, c}; }

}  // namespace

Var MatMul(Var a, Var b) {
  RequireSameGraph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const size_t n = av.rows(), k = av.cols(), m = bv.cols();
  if (bv.rows() != k) {
    throw ShapeError("MatMul: " + av.ShapeString() + " x " + bv.ShapeString());
  }
  Tensor out(Mat(n, m), 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = &bv.data()[p * m];
      double* orow = &out.data()[i * m];
      for (size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  return a.graph->Record(
      Checked(std::move(out), "MatMul"), {a.id, b.id},
      [ai = a.id, bi = b.id, n, k, m](Graph& g, size_t self) {
        const Tensor& go = g.OutGrad(self);
        const Tensor& av = g.value(ai);
        const Tensor& bv = g.value(bi);
        if (Tensor* ga = g.MutableGrad(ai)) {
          // dA = dO * B^T
          for (size_t i = 0; i < n; ++i) {
            for (size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (size_t j = 0; j < m; ++j) {
                acc += go[i * m + j] * bv[p * m + j];
              }
              (*ga)[i * k + p] += acc;
            }
          }
        }
        if (Tensor* gb = g.MutableGrad(bi)) {
          // dB = A^T * dO
          for (size_t i = 0; i < n; ++i) {
            for (size_t p = 0; p < k; ++p) {
              const double aip = av[i * k + p];
              if (aip == 0.0) continue;
              for (size_t j = 0; j < m; ++j) {
                (*gb)[p * m + j] += aip * go[i * m + j];
              }
            }
          }
        }
      });
}

namespace {

// Shared body of Add/Sub: out = a + sign * b with optional row broadcast.
Var AddSigned(Var a, Var b, double sign, const char* op) {
  RequireSameGraph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool broadcast = !av.SameShape(bv);
  if (broadcast && !(bv.rows() == 1 && bv.cols() == av.cols())) {
    throw ShapeError(std::string(op) + ": shape mismatch " + av.ShapeString() +
                     " vs " + bv.ShapeString());
  }
  Tensor out = av;
  const size_t m = av.cols();
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] += sign * bv[broadcast ? i % m : i];
  }
  return a.graph->Record(
      Checked(std::move(out), op), {a.id, b.id},
      [ai = a.id, bi = b.id, sign, broadcast, m](Graph& g, size_t self) {
        const Tensor& go = g.OutGrad(self);
        if (Tensor* ga = g.MutableGrad(ai)) {
          for (size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i];
        }
        if (Tensor* gb = g.MutableGrad(bi)) {
          for (size_t i = 0; i < go.size(); ++i) {
            (*gb)[broadcast ? i % m : i] += sign * go[i];
          }
        }
      });
}

// Shared body of unary elementwise ops with derivative computed from the
// input value x and output value y.
template <typename F, typename D>
Var Elementwise(Var x, const char* op, F f, D dfdx) {
  const Tensor& xv = x.value();
  Tensor out = xv;
  for (double& v : out.vec()) v = f(v);
  return x.graph->Record(
      Checked(std::move(out), op), {x.id},
      [xi = x.id, dfdx](Graph& g, size_t self) {
        const Tensor& go = g.OutGrad(self);
        const Tensor& xv = g.value(xi);
        const Tensor& yv = g.value(self);
        Tensor* gx = g.MutableGrad(xi);
        for (size_t i = 0; i < go.size(); ++i) {
          (*gx)[i] += go[i] * dfdx(xv[i], yv[i]);
        }
      });
}

}  // namespace

Var Add(Var a, Var b) { return AddSigned(a, b, 1.0, "Add"); }
Var Sub(Var a, Var b) { return AddSigned(a, b, -1.0, "Sub"); }

Var Mul(Var a, Var b) {
  RequireSameGraph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  RequireSameShape(av, bv, "Mul");
  Tensor out = av;
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.graph->Record(
      Checked(std::move(out), "Mul"), {a.id, b.id},
      [ai = a.id, bi = b.id](Graph& g, size_t self) {
        const Tensor& go = g.OutGrad(self);
        const Tensor& av = g.value(ai);
        const Tensor& bv = g.value(bi);
        if (Tensor* ga = g.MutableGrad(ai)) {
          for (size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * bv[i];
        }
        if (Tensor* gb = g.MutableGrad(bi)) {
          for (size_t i = 0; i < go.size(); ++i) (*gb)[i] += go[i] * av[i];
        }
      });
}

Var MulScalar(Var a, double c) {
  return Elementwise(
      a, "MulScalar", [c](double v) { return c * v; },
      [c](double, double) { return c; });
}

Var AddScalar(Var a, double c) {
  return Elementwise(
      a, "AddScalar", [c](double v) { return v + c; },
      [](double, double) { return 1.0; });
}

Var LeakyRelu(Var x, double slope) {
  return Elementwise(
      x, "LeakyRelu", [slope](double v) { return v > 0 ? v : slope * v; },
      [slope](double v, double) { return v > 0 ? 1.0 : slope; });
}

Var Sigmoid(Var x) {
  return Elementwise(
      x, "Sigmoid",
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var LogClamped(Var x, double eps) {
  if (!(eps > 0)) throw InvalidArgument("LogClamped: eps must be positive");
  return Elementwise(
      x, "LogClamped",
      [eps](double v) { return std::log(std::clamp(v, eps, 1.0)); },
      [eps](double v, double) {
        return (v >= eps && v <= 1.0) ? 1.0 / v : 0.0;
      });
}

Var Softmax(Var x, double temperature) {
  if (!(temperature > 0)) {
    throw InvalidArgument("Softmax: temperature must be positive");
  }
  const Tensor& xv = x.value();
  const size_t n = xv.rows(), m = xv.cols();
  Tensor out(Mat(n, m), 0.0);
  for (size_t r = 0; r < n; ++r) {
    auto in = xv.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (size_t j = 0; j < m; ++j) {
      o[j] = std::exp((in[j] - mx) / temperature);
      z += o[j];
    }
    for (size_t j = 0; j < m; ++j) o[j] /= z;
  }
  return x.graph->Record(
      Checked(std::move(out), "Softmax"), {x.id},
      [xi = x.id, temperature, n, m](Graph& g, size_t self) {
        const Tensor& go = g.OutGrad(self);
        const Tensor& y = g.value(self);
        Tensor* gx = g.MutableGrad(xi);
        for (size_t r = 0; r < n; ++r) {
          double dot = 0.0;
          for (size_t j = 0; j < m; ++j) dot += go[r * m + j] * y[r * m + j];
          for (size_t j = 0; j < m; ++j) {
            (*gx)[r * m + j] +=
                y[r * m + j] * (go[r * m + j] - dot) / temperature;
          }
        }
      });
}

Var Sum(Var x) {
  double s = 0.0;
  for (double v : x.value().vec()) s += v;
  return x.graph->Record(Checked(Tensor::Scalar(s), "Sum"), {x.id},
                         [xi = x.id](Graph& g, size_t self) {
                           const double go = g.OutGrad(self)[0];
                           Tensor* gx = g.MutableGrad(xi);
                           for (double& v : gx->vec()) v += go;
                         });
}

Var Mean(Var x) {
  const size_t n = x.value().size();
  if (n == 0) throw ShapeError("Mean of empty tensor");
  double s = 0.0;
  for (double v : x.value().vec()) s += v;
  return x.graph->Record(
      Checked(Tensor::Scalar(s / static_cast<double>(n)), "Mean"), {x.id},
      [xi = x.id, n](Graph& g, size_t self) {
        const double go = g.OutGrad(self)[0] / static_cast<double>(n);
        Tensor* gx = g.MutableGrad(xi);
        for (double& v : gx->vec()) v += go;
      });
}

Var RowSum(Var x) {
  const Tensor& xv = x.value();
  const size_t n = xv.rows(), m = xv.cols();
  Tensor out(Mat(n, 1), 0.0);
  for (size_t r = 0; r < n; ++r) {
    for (double v : xv.row(r)) out[r] += v;
  }
  return x.graph->Record(Checked(std::move(out), "RowSum"), {x.id},
                         [xi = x.id, m](Graph& g, size_t self) {
                           const Tensor& go = g.OutGrad(self);
                           Tensor* gx = g.MutableGrad(xi);
                           for (size_t i = 0; i < gx->size(); ++i) {
                             (*gx)[i] += go[i / m];
                           }
                         });
}

Var SelectRow(Var x, size_t row) {
  const Tensor& xv = x.value();
  if (row >= xv.rows()) {
    throw ShapeError("SelectRow: row " + std::to_string(row) +
                     " out of range for " + xv.ShapeString());
  }
  const size_t m = xv.cols();
  auto r = xv.row(row);
  Tensor out(Mat(1, m), std::vector<double>(r.begin(), r.end()));
  return x.graph->Record(std::move(out), {x.id},
                         [xi = x.id, row, m](Graph& g, size_t self) {
                           const Tensor& go = g.OutGrad(self);
                           Tensor* gx = g.MutableGrad(xi);
                           for (size_t j = 0; j < m; ++j) {
                             (*gx)[row * m + j] += go[j];
                           }
                         });
}

Var Pick(Var x, std::span<const int> index) {
  const Tensor& xv = x.value();
  const size_t n = xv.rows(), m = xv.cols();
  if (index.size() != n) {
    throw ShapeError("Pick: " + std::to_string(index.size()) +
                     " indices for " + xv.ShapeString());
  }
  std::vector<int> idx(index.begin(), index.end());
  Tensor out(Mat(n, 1), 0.0);
  for (size_t r = 0; r < n; ++r) {
    if (idx[r] < 0 || static_cast<size_t>(idx[r]) >= m) {
      throw InvalidArgument("Pick: index " + std::to_string(idx[r]) +
                            " out of range [0," + std::to_string(m) + ")");
    }
    out[r] = xv[r * m + idx[r]];
  }
  return x.graph->Record(std::move(out), {x.id},
                         [xi = x.id, idx = std::move(idx), m](Graph& g,
                                                              size_t self) {
                           const Tensor& go = g.OutGrad(self);
                           Tensor* gx = g.MutableGrad(xi);
                           for (size_t r = 0; r < idx.size(); ++r) {
                             (*gx)[r * m + idx[r]] += go[r];
                           }
                         });
}

Var ConcatCols(Var a, Var b) {
  RequireSameGraph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const size_t n = av.rows(), ma = av.cols(), mb = bv.cols();
  if (bv.rows() != n) {
    throw ShapeError("ConcatCols: " + av.ShapeString() + " | " +
                     bv.ShapeString());
  }
  Tensor out(Mat(n, ma + mb), 0.0);
  for (size_t r = 0; r < n; ++r) {
    for (size_t j = 0; j < ma; ++j) out[r * (ma + mb) + j] = av[r * ma + j];
    for (size_t j = 0; j < mb; ++j) {
      out[r * (ma + mb) + ma + j] = bv[r * mb + j];
    }
  }
  return a.graph->Record(
      std::move(out), {a.id, b.id},
      [ai = a.id, bi = b.id, n, ma, mb](Graph& g, size_t self) {
        const Tensor& go = g.OutGrad(self);
        const size_t w = ma + mb;
        if (Tensor* ga = g.MutableGrad(ai)) {
          for (size_t r = 0; r < n; ++r) {
            for (size_t j = 0; j < ma; ++j) (*ga)[r * ma + j] += go[r * w + j];
          }
        }
        if (Tensor* gb = g.MutableGrad(bi)) {
          for (size_t r = 0; r < n; ++r) {
            for (size_t j = 0; j < mb; ++j) {
              (*gb)[r * mb + j] += go[r * w + ma + j];
            }
          }
        }
      });
}

}  // namespace hbc::ad
