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

#include "hbc/attacks.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hbc/errors.h"
#include "hbc/losses.h"

namespace hbc {

int ThresholdAttack::DecodeEntropy(double entropy_bits) const {
  const int low = entropy_bits <= tau ? 0 : 1;
  return polarity == Polarity::kLowEntropyIsZero ? low : 1 - low;
}

int ThresholdAttack::Decode(std::span<const double> probs) const {
  return DecodeEntropy(ShannonEntropy(probs, LogBase::kBits));
}

nlohmann::json ThresholdAttack::ToJson() const {
  return {{"tau", tau},
          {"polarity", polarity == Polarity::kLowEntropyIsZero
                           ? "low_entropy_is_0"
                           : "low_entropy_is_1"}};
}

ThresholdAttack ThresholdAttack::FromJson(const nlohmann::json& j) {
  ThresholdAttack a;
  a.tau = j.at("tau").get<double>();
  const std::string p = j.value("polarity", std::string("low_entropy_is_0"));
  if (p == "low_entropy_is_0") {
    a.polarity = Polarity::kLowEntropyIsZero;
  } else if (p == "low_entropy_is_1") {
    a.polarity = Polarity::kLowEntropyIsOne;
  } else {
    throw ParseError("unknown polarity '" + p + "'");
  }
  return a;
}

TauSelection SelectTau(std::span<const double> entropies_bits,
                       std::span<const int> s) {
  if (entropies_bits.empty()) throw InvalidArgument("SelectTau: empty input");
  if (entropies_bits.size() != s.size()) {
    throw ShapeError("SelectTau: entropies and labels differ in length");
  }
  const size_t n = s.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return entropies_bits[a] < entropies_bits[b];
  });
  size_t total_ones = 0;
  for (int v : s) {
    if (v != 0 && v != 1) throw InvalidArgument("SelectTau: s must be binary");
    total_ones += v;
  }

  // Walking the sorted entropies, `zeros_le`/`ones_le` count labels with
  // H <= the current candidate.
  TauSelection best;
  best.accuracy = -1.0;
  size_t zeros_le = 0, ones_le = 0;
  auto consider = [&](double tau) {
    const double hits0 =
        static_cast<double>(zeros_le + (total_ones - ones_le)) / n;
    const double hits1 = 1.0 - hits0;
    if (hits0 > best.accuracy) {
      best = {{tau, Polarity::kLowEntropyIsZero}, hits0};
    }
    if (hits1 > best.accuracy) {
      best = {{tau, Polarity::kLowEntropyIsOne}, hits1};
    }
  };
  for (size_t i = 0; i < n;) {
    const double h = entropies_bits[order[i]];
    size_t j = i;
    while (j < n && entropies_bits[order[j]] == h) {
      if (s[order[j]] == 1) {
        ++ones_le;
      } else {
        ++zeros_le;
      }
      ++j;
    }
    const double tau = j < n ? 0.5 * (h + entropies_bits[order[j]]) : h;
    consider(tau);
    i = j;
  }
  return best;
}

std::pair<int, int> SubrangeAttack::Decode(double y_hat) const {
  if (!(tau_prime > 0.0 && tau_prime < 0.5)) {
    throw InvalidArgument("tau' must lie in (0, 0.5)");
  }
  if (!(y_hat >= 0.0 && y_hat <= 1.0)) {
    throw InvalidArgument("sub-range decoding needs y_hat in [0,1]");
  }
  if (y_hat < tau_prime) return {0, 0};
  if (y_hat < 0.5) return {0, 1};
  if (y_hat < 1.0 - tau_prime) return {1, 0};
  return {1, 1};
}

std::pair<int, int> HardcodeDecode(std::span<const double> y_hat,
                                   double beta_y, double beta_s, int num_s) {
  constexpr double kTol = 1e-9;
  BetaWeights{0.0, beta_y, beta_s}.Validate(/*paired=*/true);
  if (std::abs(beta_y - 0.5) <= kTol || beta_y <= kTol || beta_s <= kTol) {
    throw InvalidArgument(
        "hard-mixture codes collide; need beta_y outside {0, 0.5, 1}");
  }
  if (y_hat.empty()) throw InvalidArgument("empty mixture code");
  auto near = [&](double v, double code) { return std::abs(v - code) <= kTol; };

  if (y_hat.size() == 1) {
    const double v = y_hat[0];
    if (near(v, 0.0)) return {0, 0};
    if (near(v, beta_s)) return {0, 1};
    if (near(v, beta_y)) return {1, 0};
    if (near(v, 1.0)) return {1, 1};
    throw InvalidArgument("value " + std::to_string(v) +
                          " is not a hard-mixture code");
  }

  int y_idx = -1, s_idx = -1;
  for (size_t i = 0; i < y_hat.size(); ++i) {
    const double v = y_hat[i];
    const int idx = static_cast<int>(i);
    if (near(v, 0.0)) continue;
    if (near(v, 1.0) && y_idx < 0 && s_idx < 0) {
      y_idx = s_idx = idx;
    } else if (near(v, beta_y) && y_idx < 0) {
      y_idx = idx;
    } else if (near(v, beta_s) && s_idx < 0) {
      s_idx = idx;
    } else {
      throw InvalidArgument("vector does not match a hard-mixture code");
    }
  }
  if (y_idx < 0 || s_idx < 0) {
    throw InvalidArgument("vector does not match a hard-mixture code");
  }
  if (num_s > 0 && s_idx >= num_s) {
    throw InvalidArgument("decoded s index outside [S]");
  }
  return {y_idx, s_idx};
}

const char* OutputKindName(OutputKind k) {
  return k == OutputKind::kRaw ? "raw" : "soft";
}

OutputKind ParseOutputKind(const std::string& name) {
  if (name == "raw") return OutputKind::kRaw;
  if (name == "soft") return OutputKind::kSoft;
  throw ParseError("unknown output kind '" + name + "'");
}

std::vector<int> MlpDecode(const MlpSpec& g_spec, const ModelParams& g_params,
                           const Tensor& y_hat) {
  return ArgmaxRows(Forward(g_params, g_spec, y_hat));
}

}  // namespace hbc
