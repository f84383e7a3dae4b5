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

#ifndef HBC_TENSOR_H_
#define HBC_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hbc {

// Dense row-major tensor of 64-bit reals. Rank 0 is a scalar, rank 1 is
// treated as a single row and rank 2 as a matrix; no op needs more.
class Tensor {
 public:
  Tensor() : shape_{0, 0} {}
  explicit Tensor(std::vector<size_t> shape, double fill = 0.0);
  Tensor(std::vector<size_t> shape, std::vector<double> data);

  static Tensor Scalar(double v) { return Tensor({}, std::vector<double>{v}); }
  static Tensor Matrix(size_t rows, size_t cols, std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
  }
  static Tensor Zeros(size_t rows, size_t cols) {
    return Tensor({rows, cols}, 0.0);
  }
  static Tensor Row(std::vector<double> data) {
    const size_t n = data.size();
    return Tensor({1, n}, std::move(data));
  }

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  size_t rows() const;
  size_t cols() const;
  bool is_scalar() const { return data_.size() == 1; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  std::span<const double> row(size_t r) const {
    return std::span<const double>(data_).subspan(r * cols(), cols());
  }
  std::span<double> row(size_t r) {
    return std::span<double>(data_).subspan(r * cols(), cols());
  }

  bool SameShape(const Tensor& other) const;
  bool AllFinite() const;
  void Fill(double v);

  std::string ShapeString() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

// Throws NumericError naming `what` if any entry is NaN or Inf.
void CheckFinite(const Tensor& t, const char* what);

}  // namespace hbc

#endif  // HBC_TENSOR_H_
