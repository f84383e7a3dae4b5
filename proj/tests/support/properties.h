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

#ifndef HBC_TESTS_SUPPORT_PROPERTIES_H_
#define HBC_TESTS_SUPPORT_PROPERTIES_H_

#include <cstddef>
#include <string>

namespace hbc::testing {

struct PropertyReport {
  size_t cases = 0;
  size_t failures = 0;
  double worst = 0.0;  // largest observed error, where meaningful
  std::string detail;  // first failure

  bool ok() const { return cases > 0 && failures == 0; }
};

// Backward rule of every autodiff op against central finite differences.
// Each op output is reduced to a scalar through a fixed random weighting.
PropertyReport CheckOpGradients(size_t seeds, double tolerance = 1e-4);

// Analytic gradients of every loss against central finite differences
// (h = 1e-5). A case fails when the relative error
// ||a - n|| / (||a|| + ||n||) reaches `tolerance`.
PropertyReport CheckLossGradients(size_t seeds, double tolerance = 1e-4);

// Chords of the convex combined log-loss in theta: the loss at a convex
// combination never exceeds the chord by more than `slack`.
PropertyReport CheckConvexChords(size_t chords, double slack = 1e-9);

// SelectTau agrees with an exhaustive search over every candidate threshold.
PropertyReport CheckSelectTauBruteForce(size_t trials);

// Auc agrees with counting ordered pairs (ties count half).
PropertyReport CheckAucPairOracle(size_t trials);

// Every value in [0,1] lands in exactly one sub-range, matching the
// interval definition.
PropertyReport CheckSubrangeTotality();

// The four scalar codes, and every (y, s) vector code, are distinct and
// decode back to their inputs.
PropertyReport CheckMixHardInjective();

}  // namespace hbc::testing

#endif  // HBC_TESTS_SUPPORT_PROPERTIES_H_
