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

#ifndef HBC_MIXTURE_H_
#define HBC_MIXTURE_H_

#include <span>
#include <vector>

#include "hbc/model.h"

namespace hbc {

enum class MixMode { kHard, kNormal };

// Black-box construction: two single-attribute classifiers whose outputs
// are blended into one vector of the target's width.
struct MixtureModel {
  MlpSpec f_y_spec;
  ModelParams f_y;
  MlpSpec f_s_spec;
  ModelParams f_s;
  double beta_y = 0.8;
  double beta_s = 0.2;
  MixMode mode = MixMode::kHard;

  // Scalar code per row for logistic members, else one vector per row.
  Tensor Output(const Tensor& x) const;
};

// beta_y * round(z_y) + beta_s * round(z_s). Rejects beta_y == 0.5.
double MixHard(double z_y, double z_s, double beta_y, double beta_s);
// Places beta_y at argmax(z_y) and beta_s at argmax(z_s) in a vector of
// z_y's width; coinciding indices add up.
std::vector<double> MixHard(std::span<const double> z_y,
                            std::span<const double> z_s, double beta_y,
                            double beta_s);
// beta_y * z_y + beta_s * z_s.
double MixNormal(double z_y, double z_s, double beta_y, double beta_s);

}  // namespace hbc

#endif  // HBC_MIXTURE_H_
