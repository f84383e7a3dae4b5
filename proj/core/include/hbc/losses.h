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

#ifndef HBC_LOSSES_H_
#define HBC_LOSSES_H_

#include <span>
#include <vector>

#include "hbc/autodiff.h"
#include "hbc/tensor.h"

namespace hbc {

// Multipliers of the compression, target and sensitive terms.
struct BetaWeights {
  double x = 0.0;
  double y = 1.0;
  double s = 0.0;

  // All non-negative; when `paired`, y + s must equal 1.
  void Validate(bool paired) const;
};

enum class LogBase { kNats, kBits };

// Throws InvalidArgument unless entries are >= 0 and sum to 1 +- 1e-9.
void CheckSimplex(std::span<const double> p);

// Every logarithm below clamps its argument to [1e-12, 1]; loss values are
// in nats unless a base is given.

double ShannonEntropy(std::span<const double> p, LogBase base = LogBase::kNats);
double CrossEntropy(int label, std::span<const double> p);

// beta_y * CE(y, p) + beta_s * (+1 if s == 0 else -1) * H(p). Binary s only.
double RegularizedLoss(std::span<const double> p, int y, int s, double beta_y,
                       double beta_s);

// beta_x * mean H(p) + beta_y * mean CE(y, p) + beta_s * mean CE(s, g).
double IbLoss(const Tensor& p, std::span<const int> y, const Tensor& g,
              std::span<const int> s, const BetaWeights& betas);

// Mean CE(s, g) over the batch.
double DecoderLoss(const Tensor& g, std::span<const int> s);

// sum_i t_i ln(t_i / s_i) for two simplices (already temperature-scaled).
double KdKl(std::span<const double> teacher, std::span<const double> student);

struct LossWithGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

// Logistic model y_hat = sigmoid(theta . x) fitted to the soft label
// z = beta_y * y + beta_s * s with log-loss. Convex in theta.
LossWithGradient ConvexCombinedLogLoss(std::span<const double> theta,
                                       std::span<const double> x, int y, int s,
                                       double beta_y, double beta_s);

namespace loss {

// Graph versions. `probs` rows are simplices.

// N x 1 per-row entropies in nats.
ad::Var RowEntropy(ad::Var probs);
ad::Var MeanEntropy(ad::Var probs);
ad::Var MeanCrossEntropy(ad::Var probs, std::span<const int> labels);
ad::Var Regularized(ad::Var probs, std::span<const int> y,
                    std::span<const int> s, double beta_y, double beta_s);
ad::Var InformationBottleneck(ad::Var probs, std::span<const int> y,
                              ad::Var g_probs, std::span<const int> s,
                              const BetaWeights& betas);
ad::Var Decoder(ad::Var g_probs, std::span<const int> s);
// Mean over rows of KL(teacher || student).
ad::Var KdKl(const Tensor& teacher, ad::Var student_probs);

}  // namespace loss

}  // namespace hbc

#endif  // HBC_LOSSES_H_
