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

#ifndef HBC_ATTACKS_H_
#define HBC_ATTACKS_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hbc/model.h"
#include "hbc/tensor.h"
#include "nlohmann/json.hpp"

namespace hbc {

// Which side of the threshold decodes to s = 0.
enum class Polarity {
  kLowEntropyIsZero,  // s = 0 iff H <= tau
  kLowEntropyIsOne,   // s = 1 iff H <= tau
};

// Entropy threshold decoder for binary s. tau is in bits.
struct ThresholdAttack {
  double tau = 0.5;
  Polarity polarity = Polarity::kLowEntropyIsZero;

  int Decode(std::span<const double> probs) const;
  int DecodeEntropy(double entropy_bits) const;
  nlohmann::json ToJson() const;
  static ThresholdAttack FromJson(const nlohmann::json& j);
};

struct TauSelection {
  ThresholdAttack attack;
  double accuracy = 0.0;
};

// Sweeps every midpoint between consecutive distinct entropies plus the
// largest entropy, under both polarities, and keeps the most accurate.
// Ties go to the smaller tau, then to the default polarity.
TauSelection SelectTau(std::span<const double> entropies_bits,
                       std::span<const int> s);

// Scalar decoder for a normal mixture output in [0,1].
struct SubrangeAttack {
  double tau_prime = 0.1;

  // Returns (y, s) per the four half-open sub-ranges; 1.0 maps to (1,1).
  std::pair<int, int> Decode(double y_hat) const;
};

// Decodes a hard-mixture code. A length-1 input is the scalar form with
// codes {0, beta_s, beta_y, 1}; otherwise beta_y marks y's index and beta_s
// marks s's index (a single 1.0 marks both).
std::pair<int, int> HardcodeDecode(std::span<const double> y_hat,
                                   double beta_y, double beta_s,
                                   int num_s = 0);

// Which released output a parameterized decoder reads.
enum class OutputKind { kRaw, kSoft };
const char* OutputKindName(OutputKind k);
OutputKind ParseOutputKind(const std::string& name);

// Parameterized decoder G with its input space.
struct MlpAttack {
  MlpSpec spec;
  ModelParams params;
  OutputKind input = OutputKind::kSoft;
};

// Argmax of G's rows (lowest index on ties).
std::vector<int> MlpDecode(const MlpSpec& g_spec, const ModelParams& g_params,
                           const Tensor& y_hat);

}  // namespace hbc

#endif  // HBC_ATTACKS_H_
