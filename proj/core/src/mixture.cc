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

#include "hbc/mixture.h"

#include <cmath>

#include "hbc/errors.h"

namespace hbc {

namespace {

void CheckBetas(double beta_y, double beta_s) {
  if (!(beta_y >= 0.0 && beta_y <= 1.0 && beta_s >= 0.0 && beta_s <= 1.0) ||
      std::abs(beta_y + beta_s - 1.0) > 1e-9) {
    throw InvalidArgument("mixture needs beta_y, beta_s in [0,1] summing to 1");
  }
}

void CheckUnit(double z, const char* name) {
  if (!(z >= 0.0 && z <= 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in [0,1]");
  }
}

}  // namespace

double MixHard(double z_y, double z_s, double beta_y, double beta_s) {
  CheckBetas(beta_y, beta_s);
  if (beta_y == 0.5) {
    throw InvalidArgument("hard mixture with beta_y == 0.5 is not decodable");
  }
  CheckUnit(z_y, "z_y");
  CheckUnit(z_s, "z_s");
  return beta_y * std::round(z_y) + beta_s * std::round(z_s);
}

std::vector<double> MixHard(std::span<const double> z_y,
                            std::span<const double> z_s, double beta_y,
                            double beta_s) {
  CheckBetas(beta_y, beta_s);
  if (beta_y == 0.5) {
    throw InvalidArgument("hard mixture with beta_y == 0.5 is not decodable");
  }
  if (z_s.size() > z_y.size()) {
    throw InvalidArgument("hard mixture needs S <= Y");
  }
  std::vector<double> out(z_y.size(), 0.0);
  out[Argmax(z_y)] += beta_y;
  out[Argmax(z_s)] += beta_s;
  return out;
}

double MixNormal(double z_y, double z_s, double beta_y, double beta_s) {
  CheckBetas(beta_y, beta_s);
  CheckUnit(z_y, "z_y");
  CheckUnit(z_s, "z_s");
  return beta_y * z_y + beta_s * z_s;
}

Tensor MixtureModel::Output(const Tensor& x) const {
  const Tensor zy = Forward(f_y, f_y_spec, x);
  const Tensor zs = Forward(f_s, f_s_spec, x);
  const bool scalar = f_y_spec.output == OutputMode::kSigmoid &&
                      f_s_spec.output == OutputMode::kSigmoid;
  if (scalar) {
    Tensor out({x.rows(), 1}, 0.0);
    for (size_t r = 0; r < x.rows(); ++r) {
      out[r] = mode == MixMode::kHard ? MixHard(zy[r], zs[r], beta_y, beta_s)
                                      : MixNormal(zy[r], zs[r], beta_y, beta_s);
    }
    return out;
  }
  if (mode != MixMode::kHard) {
    throw InvalidArgument("normal mixture is defined for scalar members only");
  }
  Tensor out({x.rows(), zy.cols()}, 0.0);
  for (size_t r = 0; r < x.rows(); ++r) {
    const auto v = MixHard(zy.row(r), zs.row(r), beta_y, beta_s);
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace hbc
