//
// Copyright 2026 The bppfl Authors
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

#ifndef BPPFL_CHECKS_H_
#define BPPFL_CHECKS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace bppfl {

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json detail;
};

struct SuiteOptions {
  uint64_t seed = 1;
  size_t samples = 100000;
  // Fault fixtures: each should turn a specific verdict into a failure.
  bool break_tail_correction = false;
  bool break_antisymmetry = false;
};

// Product-of-factors normality for DN* x DN combinations.
CheckResult CheckProductNormality(const SuiteOptions& opt);
// R o eta and R o Delta against N(0, sigma^2) for the first, a middle and
// the last trainable layer.
CheckResult CheckLayerCaseNormality(const SuiteOptions& opt);
// Bitwise antisymmetry and vanishing aggregate of pairwise noise on a
// random 5-out graph over 100 clients.
CheckResult CheckPairwiseCancellation(const SuiteOptions& opt);
// Recovered gradients from the perturbed model against plain backprop.
CheckResult CheckGradientRecovery(const SuiteOptions& opt);
// Hidden and output activations of the perturbed model against the plain one.
CheckResult CheckOutputIdentity(const SuiteOptions& opt);
// An alternative (model, secret) pair reproduces the perturbed model.
CheckResult CheckUnrecoverability(const SuiteOptions& opt);
// solve_sigmas / check_dp round trip over a grid of budgets.
CheckResult CheckPrivacyRoundTrip(const SuiteOptions& opt);

std::vector<CheckResult> RunStatsSuite(const SuiteOptions& opt);
nlohmann::json SuiteToJson(const std::vector<CheckResult>& results);

}  // namespace bppfl

#endif  // BPPFL_CHECKS_H_
