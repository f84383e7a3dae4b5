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

#include "hbc/losses.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hbc/errors.h"

namespace hbc {

void BetaWeights::Validate(bool paired) const {
  if (!(x >= 0.0 && y >= 0.0 && s >= 0.0)) {
    throw InvalidArgument("beta multipliers must be non-negative");
  }
  if (paired && std::abs(y + s - 1.0) > 1e-9) {
    throw InvalidArgument("beta_y + beta_s must equal 1");
  }
}

void CheckSimplex(std::span<const double> p) {
  if (p.empty()) throw InvalidArgument("empty probability vector");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("probability entries must be finite and >= 0");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("probabilities sum to " + std::to_string(total) +
                          ", not 1");
  }
}

namespace {

double ClampedLog(double v) { return std::log(std::clamp(v, ad::kLogEps, 1.0)); }

void CheckLabel(int label, size_t classes) {
  if (label < 0 || static_cast<size_t>(label) >= classes) {
    throw InvalidArgument("label " + std::to_string(label) +
                          " outside [0," + std::to_string(classes) + ")");
  }
}

void CheckBatch(size_t rows, size_t labels) {
  if (rows != labels) {
    throw ShapeError("batch length mismatch: " + std::to_string(rows) +
                     " rows vs " + std::to_string(labels) + " labels");
  }
  if (rows == 0) throw ShapeError("empty batch");
}

double Softplus(double a) {
  return a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
}

}  // namespace

double ShannonEntropy(std::span<const double> p, LogBase base) {
  CheckSimplex(p);
  double h = 0.0;
  for (double v : p) h -= v * ClampedLog(v);
  h = std::max(h, 0.0);
  return base == LogBase::kBits ? h / std::numbers::ln2 : h;
}

double CrossEntropy(int label, std::span<const double> p) {
  CheckSimplex(p);
  CheckLabel(label, p.size());
  return -ClampedLog(p[label]);
}

double RegularizedLoss(std::span<const double> p, int y, int s, double beta_y,
                       double beta_s) {
  BetaWeights{0.0, beta_y, beta_s}.Validate(/*paired=*/true);
  if (s != 0 && s != 1) {
    throw InvalidArgument(
        "regularized loss needs a binary sensitive attribute (S = 2)");
  }
  const double sign = s == 0 ? 1.0 : -1.0;
  return beta_y * CrossEntropy(y, p) + beta_s * sign * ShannonEntropy(p);
}

double IbLoss(const Tensor& p, std::span<const int> y, const Tensor& g,
              std::span<const int> s, const BetaWeights& betas) {
  betas.Validate(/*paired=*/false);
  CheckBatch(p.rows(), y.size());
  CheckBatch(g.rows(), s.size());
  CheckBatch(p.rows(), g.rows());
  const double n = static_cast<double>(p.rows());
  double h = 0.0, ce_y = 0.0, ce_s = 0.0;
  for (size_t r = 0; r < p.rows(); ++r) {
    h += ShannonEntropy(p.row(r));
    ce_y += CrossEntropy(y[r], p.row(r));
    ce_s += CrossEntropy(s[r], g.row(r));
  }
  return betas.x * h / n + betas.y * ce_y / n + betas.s * ce_s / n;
}

double DecoderLoss(const Tensor& g, std::span<const int> s) {
  CheckBatch(g.rows(), s.size());
  double total = 0.0;
  for (size_t r = 0; r < g.rows(); ++r) total += CrossEntropy(s[r], g.row(r));
  return total / static_cast<double>(g.rows());
}

double KdKl(std::span<const double> teacher, std::span<const double> student) {
  CheckSimplex(teacher);
  CheckSimplex(student);
  if (teacher.size() != student.size()) {
    throw ShapeError("teacher and student widths differ");
  }
  double kl = 0.0;
  for (size_t i = 0; i < teacher.size(); ++i) {
    if (teacher[i] == 0.0) continue;
    kl += teacher[i] * (ClampedLog(teacher[i]) - ClampedLog(student[i]));
  }
  return kl;
}

LossWithGradient ConvexCombinedLogLoss(std::span<const double> theta,
                                       std::span<const double> x, int y, int s,
                                       double beta_y, double beta_s) {
  BetaWeights{0.0, beta_y, beta_s}.Validate(/*paired=*/true);
  if ((y != 0 && y != 1) || (s != 0 && s != 1)) {
    throw InvalidArgument("convex combined loss needs binary y and s");
  }
  if (theta.size() != x.size()) {
    throw ShapeError("theta and x lengths differ");
  }
  double a = 0.0;
  for (size_t i = 0; i < x.size(); ++i) a += theta[i] * x[i];
  const double z = beta_y * y + beta_s * s;
  // -log sigmoid(a) = softplus(-a); -log(1 - sigmoid(a)) = softplus(a).
  LossWithGradient out;
  out.value = z * Softplus(-a) + (1.0 - z) * Softplus(a);
  const double y_hat = a >= 0 ? 1.0 / (1.0 + std::exp(-a))
                              : std::exp(a) / (1.0 + std::exp(a));
  out.gradient.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) out.gradient[i] = (y_hat - z) * x[i];
  return out;
}

namespace loss {

ad::Var RowEntropy(ad::Var probs) {
  return ad::MulScalar(ad::RowSum(ad::Mul(probs, ad::LogClamped(probs))), -1.0);
}

ad::Var MeanEntropy(ad::Var probs) { return ad::Mean(RowEntropy(probs)); }

ad::Var MeanCrossEntropy(ad::Var probs, std::span<const int> labels) {
  CheckBatch(probs.value().rows(), labels.size());
  return ad::MulScalar(ad::Mean(ad::LogClamped(ad::Pick(probs, labels))), -1.0);
}

ad::Var Regularized(ad::Var probs, std::span<const int> y,
                    std::span<const int> s, double beta_y, double beta_s) {
  BetaWeights{0.0, beta_y, beta_s}.Validate(/*paired=*/true);
  const size_t n = probs.value().rows();
  CheckBatch(n, y.size());
  CheckBatch(n, s.size());
  Tensor sign({n, 1}, 0.0);
  for (size_t r = 0; r < n; ++r) {
    if (s[r] != 0 && s[r] != 1) {
      throw InvalidArgument(
          "regularized loss needs a binary sensitive attribute (S = 2)");
    }
    sign[r] = s[r] == 0 ? 1.0 : -1.0;
  }
  ad::Var ce = MeanCrossEntropy(probs, y);
  ad::Var signed_h =
      ad::Mean(ad::Mul(RowEntropy(probs), probs.graph->Constant(std::move(sign))));
  return ad::Add(ad::MulScalar(ce, beta_y), ad::MulScalar(signed_h, beta_s));
}

ad::Var InformationBottleneck(ad::Var probs, std::span<const int> y,
                              ad::Var g_probs, std::span<const int> s,
                              const BetaWeights& betas) {
  betas.Validate(/*paired=*/false);
  CheckBatch(probs.value().rows(), g_probs.value().rows());
  ad::Var total = ad::MulScalar(MeanEntropy(probs), betas.x);
  total = ad::Add(total, ad::MulScalar(MeanCrossEntropy(probs, y), betas.y));
  return ad::Add(total, ad::MulScalar(MeanCrossEntropy(g_probs, s), betas.s));
}

ad::Var Decoder(ad::Var g_probs, std::span<const int> s) {
  return MeanCrossEntropy(g_probs, s);
}

ad::Var KdKl(const Tensor& teacher, ad::Var student_probs) {
  if (!teacher.SameShape(student_probs.value())) {
    throw ShapeError("teacher and student outputs differ in shape");
  }
  double self_term = 0.0;
  for (double t : teacher.vec()) {
    if (t > 0) self_term += t * ClampedLog(t);
  }
  const double n = static_cast<double>(teacher.rows());
  ad::Var t = student_probs.graph->Constant(teacher);
  ad::Var cross = ad::Sum(ad::Mul(t, ad::LogClamped(student_probs)));
  return ad::AddScalar(ad::MulScalar(cross, -1.0 / n), self_term / n);
}

}  // namespace loss

}  // namespace hbc
