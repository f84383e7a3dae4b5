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

#include "hbc/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "hbc/errors.h"

namespace hbc {

namespace {

size_t Product(const std::vector<size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<size_t> shape, double fill)
    : shape_(std::move(shape)), data_(Product(shape_), fill) {
  if (shape_.size() > 2) throw ShapeError("tensor rank > 2 is not supported");
}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.size() > 2) throw ShapeError("tensor rank > 2 is not supported");
  if (Product(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + ShapeString());
  }
}

size_t Tensor::rows() const {
  return shape_.size() == 2 ? shape_[0] : 1;
}

size_t Tensor::cols() const {
  if (shape_.empty()) return 1;
  return shape_.back();
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() on non-scalar tensor " + ShapeString());
  }
  return data_[0];
}

bool Tensor::SameShape(const Tensor& other) const {
  return rows() == other.rows() && cols() == other.cols();
}

bool Tensor::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::ShapeString() const {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << ',';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

void CheckFinite(const Tensor& t, const char* what) {
  if (!t.AllFinite()) {
    throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace hbc
